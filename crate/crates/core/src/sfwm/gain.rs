//! Phase mismatch and CW sinc² gain of each SFWM process.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::grid::ChannelGrid;
use super::process::{ProcessType, SfwmProcess};
use crate::dispersion::DispersionMap;
use crate::error::{Error, Result};
use crate::modes::ModeId;

/// Pump split between the TE0 and TE1 arms of the mode multiplexer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub total_power_mw: f64,
    /// Fraction of power launched into TE1.
    pub split_ratio: f64,
    /// Phase of the TE1 arm relative to TE0, rad.
    pub relative_phase_rad: f64,
}

impl PumpConfig {
    pub fn new(total_power_mw: f64, split_ratio: f64, relative_phase_rad: f64) -> Result<Self> {
        let p = PumpConfig {
            total_power_mw,
            split_ratio,
            relative_phase_rad,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_power_mw >= 0.0 && self.total_power_mw.is_finite()) {
            return Err(Error::invalid("total_power_mw", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.split_ratio) {
            return Err(Error::invalid(
                "split_ratio",
                format!("{} outside [0, 1]", self.split_ratio),
            ));
        }
        if !self.relative_phase_rad.is_finite() {
            return Err(Error::invalid("relative_phase_rad", "must be finite"));
        }
        Ok(())
    }

    /// Power in the arm exciting `mode`, W.
    pub fn arm_power_w(&self, mode: ModeId) -> f64 {
        let p = self.total_power_mw * 1e-3;
        match mode.order {
            0 => p * (1.0 - self.split_ratio),
            1 => p * self.split_ratio,
            _ => 0.0,
        }
    }

    /// Optical phase of the arm exciting `mode`.
    pub fn arm_phase(&self, mode: ModeId) -> f64 {
        if mode.order == 1 {
            self.relative_phase_rad
        } else {
            0.0
        }
    }
}

/// `sin(x)/x`, continuous at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `D² (γ √(P_a P_b) L)² sinc²(Δβ L / 2)`.
pub fn sinc_squared_gain(
    degeneracy: f64,
    gamma: f64,
    power_a_w: f64,
    power_b_w: f64,
    length_m: f64,
    delta_beta: f64,
) -> f64 {
    let amp = degeneracy * gamma * (power_a_w * power_b_w).sqrt() * length_m;
    let s = sinc(0.5 * delta_beta * length_m);
    amp * amp * s * s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSample {
    pub channel: i32,
    pub detuning_thz: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainSpectrum {
    pub process: SfwmProcess,
    pub samples: Vec<GainSample>,
    pub normalized: bool,
}

impl GainSpectrum {
    pub fn max_gain(&self) -> f64 {
        self.samples.iter().map(|s| s.gain).fold(0.0, f64::max)
    }

    pub fn at_channel(&self, k: i32) -> Option<f64> {
        self.samples.iter().find(|s| s.channel == k).map(|s| s.gain)
    }
}

/// Dispersion, nonlinearity and length of one multimode waveguide section.
#[derive(Debug, Clone, PartialEq)]
pub struct SfwmModel {
    pub series: DispersionMap,
    pub length_m: f64,
    /// Nonlinear coefficient, 1/(W·m).
    pub gamma: f64,
    /// Per-process multipliers on `gamma`, keyed by `SfwmProcess::label`.
    pub gamma_scale: BTreeMap<String, f64>,
    /// Additive mismatch term (e.g. self/cross-phase modulation), rad/m.
    pub nonlinear_phase: f64,
}

impl SfwmModel {
    pub fn new(series: DispersionMap, length_m: f64, gamma: f64) -> Result<Self> {
        if !(length_m > 0.0 && length_m.is_finite()) {
            return Err(Error::invalid("length_m", "must be > 0"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be finite and >= 0"));
        }
        if let Some(first) = series.values().next() {
            if series.values().any(|s| s.omega0 != first.omega0) {
                return Err(Error::invalid("series", "all modes must share one omega0"));
            }
        }
        Ok(SfwmModel {
            series,
            length_m,
            gamma,
            gamma_scale: BTreeMap::new(),
            nonlinear_phase: 0.0,
        })
    }

    pub fn modes(&self) -> Vec<ModeId> {
        self.series.keys().copied().collect()
    }

    pub fn processes(&self) -> Vec<SfwmProcess> {
        super::process::enumerate_processes(&self.modes())
    }

    pub fn effective_gamma(&self, process: &SfwmProcess) -> f64 {
        self.gamma * self.gamma_scale.get(&process.label()).copied().unwrap_or(1.0)
    }

    fn series_of(&self, mode: ModeId) -> Result<&crate::dispersion::DispersionSeries> {
        self.series.get(&mode).ok_or(Error::MissingMode(mode))
    }

    /// `Δβ = β_s(ω₀+Δ) + β_i(ω₀−Δ) − β_pa(ω₀) − β_pb(ω₀)` from the quadratic expansions.
    pub fn phase_mismatch(&self, process: &SfwmProcess, detuning: f64) -> Result<f64> {
        let s = self.series_of(process.signal)?;
        let i = self.series_of(process.idler)?;
        let pa = self.series_of(process.pump_a)?;
        let pb = self.series_of(process.pump_b)?;
        let linear = if process.ptype == ProcessType::I {
            // The β₀ and β₁ terms cancel identically.
            s.beta2 * detuning * detuning
        } else {
            s.beta_at(detuning) + i.beta_at(-detuning) - pa.beta0 - pb.beta0
        };
        Ok(linear + self.nonlinear_phase)
    }

    pub fn gain(&self, process: &SfwmProcess, detuning: f64, pump: &PumpConfig) -> Result<f64> {
        let dbeta = self.phase_mismatch(process, detuning)?;
        Ok(sinc_squared_gain(
            process.degeneracy(),
            self.effective_gamma(process),
            pump.arm_power_w(process.pump_a),
            pump.arm_power_w(process.pump_b),
            self.length_m,
            dbeta,
        ))
    }

    pub fn gain_at_channel(&self, process: &SfwmProcess, grid: &ChannelGrid, k: i32, pump: &PumpConfig) -> Result<f64> {
        self.gain(process, grid.detuning_omega(k), pump)
    }

    /// CW pair-generation rate into one channel pair, gain × channel bandwidth (Hz).
    pub fn pair_rate_hz(&self, process: &SfwmProcess, grid: &ChannelGrid, k: i32, pump: &PumpConfig) -> Result<f64> {
        Ok(self.gain_at_channel(process, grid, k, pump)? * grid.channel_bandwidth_hz())
    }

    pub fn gain_spectrum(&self, process: &SfwmProcess, grid: &ChannelGrid, pump: &PumpConfig) -> Result<GainSpectrum> {
        let samples = grid
            .channels()
            .map(|k| {
                Ok(GainSample {
                    channel: k,
                    detuning_thz: grid.detuning_thz(k),
                    gain: self.gain_at_channel(process, grid, k, pump)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GainSpectrum {
            process: *process,
            samples,
            normalized: false,
        })
    }

    /// Spectra of `processes`; with `normalize`, all are divided by the largest
    /// Type I/III sample so that maximum equals one.
    pub fn gain_spectra(
        &self,
        processes: &[SfwmProcess],
        grid: &ChannelGrid,
        pump: &PumpConfig,
        normalize: bool,
    ) -> Result<Vec<GainSpectrum>> {
        let mut spectra = processes
            .iter()
            .map(|p| self.gain_spectrum(p, grid, pump))
            .collect::<Result<Vec<_>>>()?;
        if normalize {
            let peak = spectra
                .iter()
                .filter(|s| s.process.ptype != ProcessType::II)
                .map(GainSpectrum::max_gain)
                .fold(0.0, f64::max);
            if peak > 0.0 {
                for s in &mut spectra {
                    for sample in &mut s.samples {
                        sample.gain /= peak;
                    }
                    s.normalized = true;
                }
            }
        }
        Ok(spectra)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::DispersionSeries;
    use std::f64::consts::PI;

    fn series(mode: ModeId, beta0: f64, beta1: f64, beta2: f64) -> DispersionSeries {
        DispersionSeries {
            mode,
            omega0: 1.2e15,
            beta0,
            beta1,
            beta2,
        }
    }

    fn model(b1: (f64, f64), b2: (f64, f64)) -> SfwmModel {
        let mut map = DispersionMap::new();
        map.insert(ModeId::TE0, series(ModeId::TE0, 1.1e7, b1.0, b2.0));
        map.insert(ModeId::TE1, series(ModeId::TE1, 9.5e6, b1.1, b2.1));
        SfwmModel::new(map, 3e-3, 100.0).unwrap()
    }

    #[test]
    fn sinc_gain_peak_and_null() {
        let peak = sinc_squared_gain(1.0, 100.0, 1e-3, 1e-3, 3e-3, 0.0);
        assert!((peak - (100.0f64 * 1e-3 * 3e-3).powi(2)).abs() < 1e-20);
        let null = sinc_squared_gain(1.0, 100.0, 1e-3, 1e-3, 3e-3, 2.0 * PI / 3e-3);
        assert!(null < 1e-30 * peak.max(1.0) + 1e-35);
    }

    #[test]
    fn type_one_without_gvd_is_phase_matched() {
        let m = model((1.26e-8, 1.36e-8), (0.0, 0.0));
        let p = SfwmProcess::intramodal(ModeId::TE0);
        for d in [-1e13, -1e12, 0.0, 3e12, 1.2e13] {
            assert_eq!(m.phase_mismatch(&p, d).unwrap(), 0.0);
        }
    }

    #[test]
    fn type_three_without_walk_off_is_even() {
        let m = model((1.3e-8, 1.3e-8), (1.6e-24, 1.1e-24));
        let p = SfwmProcess::intermodal(ModeId::TE0, ModeId::TE1);
        for d in [1e12, 5e12, 1.2e13] {
            let a = m.phase_mismatch(&p, d).unwrap();
            let b = m.phase_mismatch(&p, -d).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs());
            let expect = 0.5 * (1.6e-24 + 1.1e-24) * d * d;
            // β₀ ~ 1e7 rad/m cancels, leaving ~1e-8 rad/m rounding.
            assert!((a - expect).abs() <= 1e-7, "{a} vs {expect}");
        }
    }

    #[test]
    fn type_three_reduces_to_walk_off_plus_mean_gvd() {
        let m = model((1.26e-8, 1.36e-8), (1.6e-24, 1.1e-24));
        let p = SfwmProcess::intermodal(ModeId::TE0, ModeId::TE1);
        let d = 4e12;
        let expect = (1.26e-8 - 1.36e-8) * d + 0.5 * (1.6e-24 + 1.1e-24) * d * d;
        let got = m.phase_mismatch(&p, d).unwrap();
        assert!((got - expect).abs() < 1e-9 * expect.abs());
    }

    #[test]
    fn type_two_mismatch_is_modal_index_gap() {
        let m = model((1.26e-8, 1.36e-8), (1.6e-24, 1.1e-24));
        let p = SfwmProcess::new(ModeId::TE0, ModeId::TE0, ModeId::TE1, ModeId::TE1).unwrap();
        assert_eq!(m.phase_mismatch(&p, 0.0).unwrap(), 2.0 * (9.5e6 - 1.1e7));
    }

    #[test]
    fn missing_mode() {
        let mut m = model((1.26e-8, 1.36e-8), (1.6e-24, 1.1e-24));
        m.series.remove(&ModeId::TE1);
        let p = SfwmProcess::intermodal(ModeId::TE0, ModeId::TE1);
        assert!(matches!(m.phase_mismatch(&p, 0.0), Err(Error::MissingMode(_))));
    }

    #[test]
    fn pump_split_bookkeeping() {
        let p = PumpConfig::new(6.96, 0.25, 0.3).unwrap();
        assert!((p.arm_power_w(ModeId::TE1) - 1.74e-3).abs() < 1e-15);
        assert!((p.arm_power_w(ModeId::TE0) - 5.22e-3).abs() < 1e-15);
        assert_eq!(p.arm_phase(ModeId::TE1), 0.3);
        assert!(PumpConfig::new(6.96, 1.5, 0.0).is_err());
        assert!(PumpConfig::new(-1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn joint_normalization() {
        let m = model((1.26e-8, 1.36e-8), (1.6e-24, 1.1e-24));
        let grid = ChannelGrid::new(193.4);
        let pump = PumpConfig::new(6.96, 0.5, 0.0).unwrap();
        let spectra = m.gain_spectra(&m.processes(), &grid, &pump, true).unwrap();
        let peak = spectra
            .iter()
            .filter(|s| s.process.ptype != ProcessType::II)
            .map(GainSpectrum::max_gain)
            .fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-15);
        assert!(spectra.iter().all(|s| s.normalized));
    }
}
