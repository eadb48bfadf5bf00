//! Experiment configuration (schema-versioned JSON).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::counting::{CoincidenceSetup, DetectorModel, LossChain, PathKind};
use crate::dispersion::{dispersion_map, load_dispersion_table, DispersionMap, DEFAULT_STEP_RAD_S};
use crate::error::{Error, Result};
use crate::modes::{ModeId, WaveguideGeometry};
use crate::sfwm::{ChannelGrid, PhaseModel, PumpConfig, SfwmModel};
use crate::tomography::{Likelihood, MleOptions};
use crate::units::{thz_to_omega, wavelength_nm_to_thz};

pub const CONFIG_SCHEMA_VERSION: &str = "v1";

fn default_length_mm() -> f64 {
    3.0
}
fn default_gamma() -> f64 {
    100.0
}
fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: Option<String>,
    #[serde(default)]
    pub geometry: WaveguideGeometry,
    /// Precomputed dispersion table; replaces the mode solver when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion_table: Option<String>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_length_mm")]
    pub length_mm: f64,
    #[serde(default)]
    pub pump: PumpSettings,
    /// Nonlinear coefficient, 1/(W·m). A calibration value: it scales all
    /// absolute rates but no spectral shape or ratio.
    #[serde(default = "default_gamma")]
    pub gamma_per_w_m: f64,
    /// Per-process multipliers on the nonlinear coefficient, keyed like `TE0TE1>TE0TE1`.
    #[serde(default)]
    pub gamma_scale: BTreeMap<String, f64>,
    #[serde(default)]
    pub nonlinear_phase_rad_per_m: f64,
    #[serde(default)]
    pub phase_model: PhaseModel,
    #[serde(default)]
    pub losses: LossConfig,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub coincidence: CoincidenceSetup,
    #[serde(default)]
    pub tomography: TomographyConfig,
    #[serde(default)]
    pub g2: G2Config,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub spacing_ghz: f64,
    pub max_channel: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            spacing_ghz: 100.0,
            max_channel: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpSettings {
    pub wavelength_nm: f64,
    pub power_mw: f64,
    /// Fraction of the pump sent into TE1.
    pub split_ratio: f64,
    pub relative_phase_rad: f64,
}

impl Default for PumpSettings {
    fn default() -> Self {
        PumpSettings {
            wavelength_nm: 1550.11,
            power_mw: 6.96,
            split_ratio: 0.5,
            relative_phase_rad: 0.0,
        }
    }
}

/// Optical loss budgets (detector efficiency excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossConfig {
    pub te0_counting: LossChain,
    pub te1_counting: LossChain,
    pub te0_tomography: LossChain,
    pub te1_tomography: LossChain,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            te0_counting: LossChain::default_path(ModeId::TE0, PathKind::Counting),
            te1_counting: LossChain::default_path(ModeId::TE1, PathKind::Counting),
            te0_tomography: LossChain::default_path(ModeId::TE0, PathKind::Tomography),
            te1_tomography: LossChain::default_path(ModeId::TE1, PathKind::Tomography),
        }
    }
}

impl LossConfig {
    pub fn chain(&self, mode: ModeId, path: PathKind) -> &LossChain {
        match (mode == ModeId::TE0, path) {
            (true, PathKind::Counting) => &self.te0_counting,
            (false, PathKind::Counting) => &self.te1_counting,
            (true, PathKind::Tomography) => &self.te0_tomography,
            (false, PathKind::Tomography) => &self.te1_tomography,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub counts_per_basis: f64,
    /// Channel for the Bell-state measurements; unset picks the channel
    /// nearest `preferred_bell_channel` where intermodal pairs are negligible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bell_channel: Option<u32>,
    pub preferred_bell_channel: u32,
    /// Channel for the four-term state measurement.
    pub probe_channel: u32,
    pub negligible_ratio: f64,
    /// Fidelity of the accidental-subtracted Bell state; the shortfall from
    /// one is modelled as a rotation of the signal analyzer.
    pub net_fidelity_target: f64,
    /// Raw Bell fidelity; the gap to the net value sets the accidental floor.
    pub raw_fidelity_target: f64,
    pub monte_carlo_resamples: usize,
    pub likelihood: Likelihood,
    pub fringe_step_deg: f64,
    pub fringe_span_deg: f64,
    /// Polarization rotation per unit of scan angle (2 for a half-wave plate).
    pub angle_scale: f64,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        TomographyConfig {
            counts_per_basis: 1e4,
            bell_channel: None,
            preferred_bell_channel: 8,
            probe_channel: 2,
            negligible_ratio: 0.01,
            net_fidelity_target: 0.96,
            raw_fidelity_target: 0.93,
            monte_carlo_resamples: 100,
            likelihood: Likelihood::Gaussian,
            fringe_step_deg: 5.0,
            fringe_span_deg: 360.0,
            angle_scale: 1.0,
        }
    }
}

impl TomographyConfig {
    pub fn mle_options(&self) -> MleOptions {
        MleOptions {
            likelihood: self.likelihood,
            ..MleOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct G2Config {
    pub target: f64,
}

impl Default for G2Config {
    fn default() -> Self {
        G2Config { target: 0.13 }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        parse_config_str(r#"{"schema_version": "v1"}"#).expect("defaults are valid")
    }
}

fn config_error(pointer: &str, err: Error) -> Error {
    Error::Config {
        pointer: pointer.to_string(),
        message: err.to_string(),
    }
}

fn check(pointer: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config {
            pointer: pointer.to_string(),
            message: message.to_string(),
        })
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match self.schema_version.as_deref() {
            Some(CONFIG_SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::Config {
                    pointer: "/schema_version".into(),
                    message: format!("unsupported version '{v}', expected '{CONFIG_SCHEMA_VERSION}'"),
                })
            }
            None => {
                return Err(Error::Config {
                    pointer: "/schema_version".into(),
                    message: "missing required field".into(),
                })
            }
        }
        self.geometry.validate().map_err(|e| config_error("/geometry", e))?;
        check("/grid/spacing_ghz", self.grid.spacing_ghz > 0.0 && self.grid.spacing_ghz.is_finite(), "must be > 0")?;
        check("/grid/max_channel", self.grid.max_channel >= 1, "must be >= 1")?;
        check("/length_mm", self.length_mm > 0.0 && self.length_mm.is_finite(), "must be > 0")?;
        let p = &self.pump;
        check(
            "/pump/wavelength_nm",
            (1000.0..=2000.0).contains(&p.wavelength_nm),
            "must lie in [1000, 2000] nm",
        )?;
        check("/pump/power_mw", p.power_mw >= 0.0 && p.power_mw.is_finite(), "must be >= 0")?;
        check("/pump/split_ratio", (0.0..=1.0).contains(&p.split_ratio), "must lie in [0, 1]")?;
        check("/pump/relative_phase_rad", p.relative_phase_rad.is_finite(), "must be finite")?;
        check("/gamma_per_w_m", self.gamma_per_w_m >= 0.0 && self.gamma_per_w_m.is_finite(), "must be >= 0")?;
        for (k, v) in &self.gamma_scale {
            check(&format!("/gamma_scale/{k}"), *v >= 0.0 && v.is_finite(), "must be >= 0")?;
        }
        check("/nonlinear_phase_rad_per_m", self.nonlinear_phase_rad_per_m.is_finite(), "must be finite")?;
        for (name, chain) in [
            ("te0_counting", &self.losses.te0_counting),
            ("te1_counting", &self.losses.te1_counting),
            ("te0_tomography", &self.losses.te0_tomography),
            ("te1_tomography", &self.losses.te1_tomography),
        ] {
            for (i, s) in chain.stages.iter().enumerate() {
                check(
                    &format!("/losses/{name}/{i}/loss_db"),
                    s.loss_db >= 0.0 && s.loss_db.is_finite(),
                    "must be >= 0",
                )?;
            }
        }
        self.detector.validate().map_err(|e| match e {
            Error::InvalidInput { field, message } => Error::Config {
                pointer: format!("/detector/{field}"),
                message,
            },
            e => config_error("/detector", e),
        })?;
        self.coincidence.validate().map_err(|e| match e {
            Error::InvalidInput { field, message } => Error::Config {
                pointer: format!("/coincidence/{field}"),
                message,
            },
            e => config_error("/coincidence", e),
        })?;
        let t = &self.tomography;
        let max = self.grid.max_channel;
        check("/tomography/counts_per_basis", t.counts_per_basis > 0.0 && t.counts_per_basis.is_finite(), "must be > 0")?;
        if let Some(k) = t.bell_channel {
            check("/tomography/bell_channel", (1..=max).contains(&k), "must lie within the channel grid")?;
        }
        check("/tomography/preferred_bell_channel", (1..=max).contains(&t.preferred_bell_channel), "must lie within the channel grid")?;
        check("/tomography/probe_channel", (1..=max).contains(&t.probe_channel), "must lie within the channel grid")?;
        check("/tomography/negligible_ratio", t.negligible_ratio > 0.0 && t.negligible_ratio < 1.0, "must lie in (0, 1)")?;
        check(
            "/tomography/net_fidelity_target",
            t.net_fidelity_target > 0.25 && t.net_fidelity_target <= 1.0,
            "must lie in (0.25, 1]",
        )?;
        check(
            "/tomography/raw_fidelity_target",
            t.raw_fidelity_target > 0.25 && t.raw_fidelity_target <= t.net_fidelity_target,
            "must lie in (0.25, net_fidelity_target]",
        )?;
        check("/tomography/monte_carlo_resamples", t.monte_carlo_resamples >= 2, "must be >= 2")?;
        check("/tomography/fringe_step_deg", t.fringe_step_deg > 0.0 && t.fringe_step_deg.is_finite(), "must be > 0")?;
        check(
            "/tomography/fringe_span_deg",
            t.fringe_span_deg.is_finite() && t.fringe_span_deg >= 7.0 * t.fringe_step_deg,
            "must cover at least 8 samples",
        )?;
        check("/tomography/angle_scale", t.angle_scale > 0.0 && t.angle_scale.is_finite(), "must be > 0")?;
        check("/g2/target", self.g2.target > 0.0 && self.g2.target.is_finite(), "must be > 0")?;
        Ok(())
    }

    pub fn pump_frequency_thz(&self) -> f64 {
        wavelength_nm_to_thz(self.pump.wavelength_nm)
    }

    pub fn channel_grid(&self) -> ChannelGrid {
        ChannelGrid {
            pump_frequency_thz: self.pump_frequency_thz(),
            spacing_ghz: self.grid.spacing_ghz,
            max_channel: self.grid.max_channel,
        }
    }

    pub fn pump_config(&self) -> Result<PumpConfig> {
        PumpConfig::new(self.pump.power_mw, self.pump.split_ratio, self.pump.relative_phase_rad)
    }

    /// From the table if one is configured, otherwise from the mode solver.
    pub fn dispersion(&self) -> Result<DispersionMap> {
        match &self.dispersion_table {
            Some(path) => load_dispersion_table(path),
            None => dispersion_map(
                &self.geometry,
                &[ModeId::TE0, ModeId::TE1],
                thz_to_omega(self.pump_frequency_thz()),
                DEFAULT_STEP_RAD_S,
            ),
        }
    }

    pub fn sfwm_model(&self, series: DispersionMap) -> Result<SfwmModel> {
        let mut model = SfwmModel::new(series, self.length_mm * 1e-3, self.gamma_per_w_m)?;
        model.gamma_scale = self.gamma_scale.clone();
        model.nonlinear_phase = self.nonlinear_phase_rad_per_m;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(compact.as_bytes())[..8])
    }
}

/// Parses and validates; every failure carries a JSON pointer to the field.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        pointer: crate::tomography::json_pointer(&e.path().to_string()),
        message: e.inner().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pointer_of(text: &str) -> String {
        match parse_config_str(text).unwrap_err() {
            Error::Config { pointer, .. } => pointer,
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_config_reproduces_device() {
        let c = parse_config_str(r#"{"schema_version":"v1"}"#).unwrap();
        assert_eq!(c.pump.wavelength_nm, 1550.11);
        assert_eq!(c.pump.power_mw, 6.96);
        assert_eq!(c.coincidence.window_ns, 0.8);
        assert_eq!(c.detector.dark_rate_hz, 100.0);
        assert_eq!(c.detector.efficiency, 0.85);
        assert_eq!(c.length_mm, 3.0);
        assert_eq!(c.geometry, WaveguideGeometry::default());
    }

    #[test]
    fn field_level_diagnostics() {
        assert_eq!(pointer_of(r#"{"schema_version":"v1","pump":{"split_ratio":1.5}}"#), "/pump/split_ratio");
        assert_eq!(pointer_of(r#"{}"#), "/schema_version");
        assert_eq!(pointer_of(r#"{"schema_version":"v2"}"#), "/schema_version");
        assert_eq!(pointer_of(r#"{"schema_version":"v1","pump":{"colour":1}}"#), "/pump/colour");
        assert_eq!(pointer_of(r#"{"schema_version":"v1","bogus":1}"#), "/bogus");
        assert_eq!(pointer_of(r#"{"schema_version":"v1","detector":{"efficiency":0}}"#), "/detector/efficiency");
        assert_eq!(
            pointer_of(r#"{"schema_version":"v1","losses":{"te0_counting":[{"name":"a","loss_db":-2}]}}"#),
            "/losses/te0_counting/0/loss_db"
        );
        assert_eq!(pointer_of(r#"{"schema_version":"v1","grid":{"max_channel":"x"}}"#), "/grid/max_channel");
    }

    #[test]
    fn write_then_parse_is_identity() {
        let mut c = ExperimentConfig::default();
        c.pump.split_ratio = 0.3125;
        c.tomography.bell_channel = Some(7);
        c.gamma_scale.insert("TE0TE1>TE0TE1".into(), 0.7);
        c.coincidence.background_idler_hz = 123.456789;
        let back = parse_config_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_ne!(ExperimentConfig::default().hash(), c.hash());
    }
}
