//! Four-term biphoton state per channel pair and the pump settings that turn
//! it into a maximally entangled Bell state.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gain::{sinc, PumpConfig, SfwmModel};
use super::grid::ChannelGrid;
use super::process::{ProcessType, SfwmProcess};
use crate::density::{DensityMatrix, Ket};
use crate::error::{Error, Result};
use crate::modes::ModeId;

/// Signal/idler combinations in amplitude order.
pub const COMBINATIONS: [(ModeId, ModeId); 4] = [
    (ModeId::TE1, ModeId::TE1),
    (ModeId::TE1, ModeId::TE0),
    (ModeId::TE0, ModeId::TE1),
    (ModeId::TE0, ModeId::TE0),
];

pub const COMBINATION_LABELS: [&str; 4] = ["TE1TE1", "TE1TE0", "TE0TE1", "TE0TE0"];

/// Default ratio below which intermodal pairs count as absent.
pub const DEFAULT_NEGLIGIBLE_RATIO: f64 = 0.01;

/// How each process amplitude acquires its dispersive phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModel {
    /// `√S · e^{iΔβL/2}`.
    #[default]
    Midpoint,
    /// The propagation integral `∫₀ᴸ e^{iΔβz} dz = L sinc(ΔβL/2) e^{iΔβL/2}`,
    /// which keeps the sign of the sinc.
    PropagationIntegral,
}

/// The Type I / Type III process producing a given signal/idler combination.
pub fn process_for(signal: ModeId, idler: ModeId) -> SfwmProcess {
    if signal == idler {
        SfwmProcess::intramodal(signal)
    } else {
        SfwmProcess::intermodal(signal, idler)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonState {
    pub channel_index: u32,
    /// Ordered as `COMBINATIONS`: |TE1TE1⟩, |TE1TE0⟩, |TE0TE1⟩, |TE0TE0⟩.
    pub amplitudes: [Complex64; 4],
}

impl BiphotonState {
    /// Normalizes `amplitudes` explicitly; fails if they all vanish.
    pub fn normalized(channel_index: u32, amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::EmptyState);
        }
        Ok(BiphotonState {
            channel_index,
            amplitudes: amplitudes.map(|a| a / norm),
        })
    }

    /// `Σ |a|²`
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `η₁, η₂, η₃`: moduli relative to the |TE1TE1⟩ amplitude (infinite if it vanishes).
    pub fn eta(&self) -> [f64; 3] {
        let a0 = self.amplitudes[0].norm();
        [1, 2, 3].map(|j| self.amplitudes[j].norm() / a0)
    }

    /// `δ₁, δ₂, δ₃`: phases relative to the |TE1TE1⟩ amplitude, wrapped to (−π, π].
    pub fn delta(&self) -> [f64; 3] {
        let p0 = self.amplitudes[0].arg();
        [1, 2, 3].map(|j| wrap_phase(self.amplitudes[j].arg() - p0))
    }

    pub fn ket(&self) -> Ket {
        Ket::from_column_slice(&self.amplitudes)
    }
}

/// Pure-state fit to tomography of channels ±2 of the device:
/// `0.60|11⟩ + 0.29e^{−2.8i}|10⟩ + 0.48e^{0.29i}|01⟩ + 0.57e^{0.40i}|00⟩`.
/// The rounded moduli square-sum to 0.9994, so the state is renormalized here.
pub fn reference_probe_state() -> BiphotonState {
    BiphotonState::normalized(
        2,
        [
            Complex64::from_polar(0.60, 0.0),
            Complex64::from_polar(0.29, -2.8),
            Complex64::from_polar(0.48, 0.29),
            Complex64::from_polar(0.57, 0.40),
        ],
    )
    .expect("nonzero amplitudes")
}

/// Wraps to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

impl SfwmModel {
    /// Complex generation amplitude of `process` at angular detuning `detuning`.
    pub fn process_amplitude(
        &self,
        process: &SfwmProcess,
        detuning: f64,
        pump: &PumpConfig,
        phase_model: PhaseModel,
    ) -> Result<Complex64> {
        let dbeta = self.phase_mismatch(process, detuning)?;
        let x = 0.5 * dbeta * self.length_m;
        let pump_phase = pump.arm_phase(process.pump_a) + pump.arm_phase(process.pump_b);
        let magnitude = process.degeneracy()
            * self.effective_gamma(process)
            * (pump.arm_power_w(process.pump_a) * pump.arm_power_w(process.pump_b)).sqrt()
            * self.length_m;
        let field = match phase_model {
            PhaseModel::Midpoint => magnitude * sinc(x).abs(),
            PhaseModel::PropagationIntegral => magnitude * sinc(x),
        };
        Ok(Complex64::from_polar(field, x + pump_phase))
    }

    /// Unnormalized amplitudes of the four combinations at channel `k`.
    fn raw_amplitudes(
        &self,
        grid: &ChannelGrid,
        k: u32,
        pump: &PumpConfig,
        phase_model: PhaseModel,
    ) -> Result<[Complex64; 4]> {
        let detuning = grid.detuning_omega(k as i32);
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (slot, &(s, i)) in out.iter_mut().zip(COMBINATIONS.iter()) {
            *slot = self.process_amplitude(&process_for(s, i), detuning, pump, phase_model)?;
        }
        Ok(out)
    }

    /// Type I and Type III contributions at channel `k`. Type II pairs are
    /// left out; their mismatch suppresses them by several orders of magnitude.
    pub fn biphoton_state(
        &self,
        grid: &ChannelGrid,
        k: u32,
        pump: &PumpConfig,
        phase_model: PhaseModel,
    ) -> Result<BiphotonState> {
        super::grid::channel_pair(grid, k as i32)?;
        pump.validate()?;
        let raw = self.raw_amplitudes(grid, k, pump, phase_model)?;
        BiphotonState::normalized(k, raw)
    }

    /// Largest Type III gain divided by the largest Type I gain at channel `k`.
    pub fn intermodal_ratio(&self, grid: &ChannelGrid, k: u32, pump: &PumpConfig) -> Result<f64> {
        let mut intra: f64 = 0.0;
        let mut inter: f64 = 0.0;
        for &(s, i) in &COMBINATIONS {
            let p = process_for(s, i);
            let g = self.gain_at_channel(&p, grid, k as i32, pump)?;
            match p.ptype {
                ProcessType::I => intra = intra.max(g),
                _ => inter = inter.max(g),
            }
        }
        if intra == 0.0 {
            return Ok(if inter == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok(inter / intra)
    }

    /// Two-term (intramodal-only) state, valid when the intermodal gain at
    /// channel `k` is below `threshold` of the intramodal one.
    pub fn intramodal_state(
        &self,
        grid: &ChannelGrid,
        k: u32,
        pump: &PumpConfig,
        phase_model: PhaseModel,
        threshold: f64,
    ) -> Result<BiphotonState> {
        let ratio = self.intermodal_ratio(grid, k, pump)?;
        if ratio >= threshold {
            return Err(Error::IntermodalNotNegligible { k, ratio, threshold });
        }
        let mut raw = self.raw_amplitudes(grid, k, pump, phase_model)?;
        raw[1] = Complex64::new(0.0, 0.0);
        raw[2] = Complex64::new(0.0, 0.0);
        BiphotonState::normalized(k, raw)
    }

    /// Pump split and phase giving `(|TE1TE1⟩ + |TE0TE0⟩)/√2` at channel `k`.
    ///
    /// Equal moduli need `γ₁ P₁ |sinc₁| = γ₀ P₀ |sinc₀|`; equal phases fix the
    /// pump phase at half the difference of the two dispersive phases.
    pub fn bell_operating_point(
        &self,
        grid: &ChannelGrid,
        k: u32,
        total_power_mw: f64,
        phase_model: PhaseModel,
        threshold: f64,
    ) -> Result<PumpConfig> {
        super::grid::channel_pair(grid, k as i32)?;
        let detuning = grid.detuning_omega(k as i32);
        let probe = PumpConfig::new(total_power_mw, 0.5, 0.0)?;
        let p0 = SfwmProcess::intramodal(ModeId::TE0);
        let p1 = SfwmProcess::intramodal(ModeId::TE1);
        // At equal arm powers the amplitude ratio is free of pump terms.
        let a0 = self.process_amplitude(&p0, detuning, &probe, phase_model)?;
        let a1 = self.process_amplitude(&p1, detuning, &probe, phase_model)?;
        if a0.norm() == 0.0 || a1.norm() == 0.0 {
            return Err(Error::EmptyState);
        }
        // |a| ∝ P for intramodal amplitudes, so P₁/P₀ = |a₀|/|a₁|.
        let r = a0.norm() / a1.norm();
        let split_ratio = r / (1.0 + r);
        let relative_phase_rad = wrap_phase(0.5 * (a0.arg() - a1.arg()));
        let pump = PumpConfig::new(total_power_mw, split_ratio, relative_phase_rad)?;
        let ratio = self.intermodal_ratio(grid, k, &pump)?;
        if ratio >= threshold {
            return Err(Error::IntermodalNotNegligible { k, ratio, threshold });
        }
        Ok(pump)
    }

    /// Channels in `1..=max_channel` ordered by distance from `preferred`
    /// whose Bell operating point satisfies the negligibility threshold.
    pub fn bell_channels(
        &self,
        grid: &ChannelGrid,
        preferred: u32,
        total_power_mw: f64,
        phase_model: PhaseModel,
        threshold: f64,
    ) -> Vec<u32> {
        let mut ks: Vec<u32> = (1..=grid.max_channel).collect();
        ks.sort_by_key(|&k| ((k as i64 - preferred as i64).abs(), k));
        ks.into_iter()
            .filter(|&k| {
                self.bell_operating_point(grid, k, total_power_mw, phase_model, threshold)
                    .is_ok()
            })
            .collect()
    }
}

/// Maps TE1 → H and TE0 → V; `depolarizing` mixes in white noise (0 = pure).
pub fn mode_to_polarization(state: &BiphotonState, depolarizing: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&depolarizing) {
        return Err(Error::invalid("depolarizing", "must lie in [0, 1]"));
    }
    // COMBINATIONS order is already (HH, HV, VH, VV) under this mapping.
    let pure = DensityMatrix::from_ket(&state.ket())?;
    if depolarizing == 0.0 {
        Ok(pure)
    } else {
        pure.depolarize(depolarizing)
    }
}
