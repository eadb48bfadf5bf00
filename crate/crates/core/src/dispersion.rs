//! Propagation constant and its frequency derivatives for each guided mode.
//!
//! `β(ω) = n_eff(ω) ω / c` is sampled on a five-point stencil around the
//! reference frequency; `β₁` and `β₂` come from fourth-order central
//! differences. Externally computed series can be loaded from a JSON table
//! instead of running the effective-index solver.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{eim_neff, ModeId, WaveguideGeometry};
use crate::units::{omega_to_wavelength_um, SPEED_OF_LIGHT};

/// Default finite-difference step: 2π × 50 GHz.
pub const DEFAULT_STEP_RAD_S: f64 = 2.0 * std::f64::consts::PI * 50e9;

pub const TABLE_SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSeries {
    pub mode: ModeId,
    /// Reference angular frequency, rad/s.
    pub omega0: f64,
    /// rad/m
    pub beta0: f64,
    /// s/m
    pub beta1: f64,
    /// s²/m
    pub beta2: f64,
}

impl DispersionSeries {
    /// Second-order expansion `β₀ + β₁Δ + β₂Δ²/2` at angular detuning `Δ`.
    pub fn beta_at(&self, detuning: f64) -> f64 {
        self.beta0 + self.beta1 * detuning + 0.5 * self.beta2 * detuning * detuning
    }

    pub fn group_index(&self) -> f64 {
        self.beta1 * SPEED_OF_LIGHT
    }

    pub fn validate(&self) -> Result<()> {
        let check = |field: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::DispersionTable {
                    field: format!("{}.{field}", self.mode),
                    message: format!("non-finite value {v}"),
                })
            }
        };
        check("omega0_rad_s", self.omega0)?;
        check("beta0", self.beta0)?;
        check("beta1", self.beta1)?;
        check("beta2", self.beta2)?;
        if self.omega0 <= 0.0 {
            return Err(table_err(self.mode, "omega0_rad_s", "must be > 0"));
        }
        // No guided mode travels faster than light in vacuum.
        if self.beta0 <= self.omega0 / SPEED_OF_LIGHT {
            return Err(table_err(self.mode, "beta0", "below the vacuum light line"));
        }
        if self.beta1 <= 0.0 {
            return Err(table_err(self.mode, "beta1", "must be > 0"));
        }
        Ok(())
    }
}

fn table_err(mode: ModeId, field: &str, message: &str) -> Error {
    Error::DispersionTable {
        field: format!("{mode}.{field}"),
        message: message.to_string(),
    }
}

/// Dispersion series keyed by mode.
pub type DispersionMap = BTreeMap<ModeId, DispersionSeries>;

/// Five-point stencil derivatives of `β(ω) = n_eff(ω) ω / c`.
///
/// `neff` maps angular frequency (rad/s) to effective index.
pub fn dispersion_series_with<F>(
    mode: ModeId,
    omega0: f64,
    step: f64,
    neff: F,
) -> Result<DispersionSeries>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", format!("{step} must be > 0")));
    }
    if !(omega0 > 2.0 * step) {
        return Err(Error::invalid("omega0", "must exceed twice the stencil step"));
    }
    let beta = |k: i32| -> Result<f64> {
        let omega = omega0 + k as f64 * step;
        let n = neff(omega).map_err(|e| Error::Stencil {
            omega_rad_s: omega,
            source: Box::new(e),
        })?;
        Ok(n * omega / SPEED_OF_LIGHT)
    };
    let (bm2, bm1, b0, bp1, bp2) = (beta(-2)?, beta(-1)?, beta(0)?, beta(1)?, beta(2)?);
    let beta1 = (bm2 - 8.0 * bm1 + 8.0 * bp1 - bp2) / (12.0 * step);
    let beta2 = (-bm2 + 16.0 * bm1 - 30.0 * b0 + 16.0 * bp1 - bp2) / (12.0 * step * step);
    Ok(DispersionSeries {
        mode,
        omega0,
        beta0: b0,
        beta1,
        beta2,
    })
}

/// Dispersion series of `mode` in `geometry` from the effective-index solver.
pub fn dispersion_series(
    geometry: &WaveguideGeometry,
    mode: ModeId,
    omega0: f64,
    step: f64,
) -> Result<DispersionSeries> {
    geometry.validate()?;
    dispersion_series_with(mode, omega0, step, |omega| {
        eim_neff(geometry, mode, omega_to_wavelength_um(omega))
    })
}

pub fn dispersion_map(
    geometry: &WaveguideGeometry,
    modes: &[ModeId],
    omega0: f64,
    step: f64,
) -> Result<DispersionMap> {
    modes
        .iter()
        .map(|&m| dispersion_series(geometry, m, omega0, step).map(|s| (m, s)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    mode_order: u32,
    omega0_rad_s: f64,
    beta0: f64,
    beta1: f64,
    beta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    schema_version: String,
    modes: Vec<TableEntry>,
}

/// Serializes a dispersion map to the v1 JSON table format.
pub fn dispersion_table_json(map: &DispersionMap) -> String {
    let file = TableFile {
        schema_version: TABLE_SCHEMA_VERSION.to_string(),
        modes: map
            .values()
            .map(|s| TableEntry {
                mode_order: s.mode.order,
                omega0_rad_s: s.omega0,
                beta0: s.beta0,
                beta1: s.beta1,
                beta2: s.beta2,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("table serializes");
    out.push('\n');
    out
}

/// Parses a v1 dispersion table and checks that every mode in `required` is present.
pub fn parse_dispersion_table(text: &str, required: &[ModeId]) -> Result<DispersionMap> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: TableFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::DispersionTable {
            field: path,
            message: e.into_inner().to_string(),
        }
    })?;
    if file.schema_version != TABLE_SCHEMA_VERSION {
        return Err(Error::DispersionTable {
            field: "schema_version".into(),
            message: format!(
                "expected \"{TABLE_SCHEMA_VERSION}\", found \"{}\"",
                file.schema_version
            ),
        });
    }
    let mut map = DispersionMap::new();
    for (i, e) in file.modes.iter().enumerate() {
        let series = DispersionSeries {
            mode: ModeId::te(e.mode_order),
            omega0: e.omega0_rad_s,
            beta0: e.beta0,
            beta1: e.beta1,
            beta2: e.beta2,
        };
        series.validate().map_err(|err| match err {
            Error::DispersionTable { field, message } => Error::DispersionTable {
                field: format!("modes[{i}].{}", field.split('.').nth(1).unwrap_or(&field)),
                message,
            },
            other => other,
        })?;
        if map.insert(series.mode, series).is_some() {
            return Err(Error::DispersionTable {
                field: format!("modes[{i}].mode_order"),
                message: format!("duplicate entry for {}", series.mode),
            });
        }
    }
    if let Some(first) = map.values().next() {
        if map.values().any(|s| s.omega0 != first.omega0) {
            return Err(Error::DispersionTable {
                field: "modes".into(),
                message: "all entries must share one omega0_rad_s".into(),
            });
        }
    }
    for m in required {
        if !map.contains_key(m) {
            return Err(Error::DispersionTable {
                field: "modes".into(),
                message: format!("missing entry for {m}"),
            });
        }
    }
    Ok(map)
}

/// Loads a dispersion table holding at least TE0 and TE1.
pub fn load_dispersion_table(path: impl AsRef<Path>) -> Result<DispersionMap> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dispersion_table(&text, &[ModeId::TE0, ModeId::TE1])
}
