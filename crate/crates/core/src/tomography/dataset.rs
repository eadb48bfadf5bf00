use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{basis_index, basis_labels, probabilities};
use crate::counting::poisson_draw;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};

pub const DATASET_SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measurement {
    /// Signal then idler analyzer, e.g. "DR".
    pub basis: String,
    /// Coincidences in the setting. Expectation-valued datasets carry fractional counts.
    pub counts: f64,
    /// Estimated accidental coincidences within `counts`.
    pub accidentals: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    schema_version: String,
    acquisition_time_s: f64,
    measurements: Vec<Measurement>,
}

/// Coincidences for the 16 analyzer settings `{H,V,D,R}⊗2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TomoDataset {
    pub acquisition_time_s: f64,
    /// Always in `basis_labels` order after validation.
    pub measurements: Vec<Measurement>,
}

impl TomoDataset {
    /// Checks each setting appears exactly once and reorders to the canonical order.
    pub fn new(acquisition_time_s: f64, measurements: Vec<Measurement>) -> Result<Self> {
        if !(acquisition_time_s > 0.0 && acquisition_time_s.is_finite()) {
            return Err(Error::InvalidDataset("acquisition_time_s must be > 0".into()));
        }
        if measurements.len() != 16 {
            return Err(Error::InvalidDataset(format!(
                "expected 16 settings, found {}",
                measurements.len()
            )));
        }
        let mut slots: [Option<Measurement>; 16] = Default::default();
        for m in measurements {
            let i = basis_index(&m.basis)
                .ok_or_else(|| Error::InvalidDataset(format!("unknown basis '{}'", m.basis)))?;
            if !(m.counts >= 0.0 && m.counts.is_finite()) {
                return Err(Error::InvalidDataset(format!("counts for {} must be >= 0", m.basis)));
            }
            if !(m.accidentals >= 0.0 && m.accidentals.is_finite()) {
                return Err(Error::InvalidDataset(format!("accidentals for {} must be >= 0", m.basis)));
            }
            if slots[i].is_some() {
                return Err(Error::InvalidDataset(format!("basis '{}' appears twice", m.basis)));
            }
            slots[i] = Some(m);
        }
        Ok(TomoDataset {
            acquisition_time_s,
            measurements: slots.into_iter().map(|m| m.expect("16 distinct settings")).collect(),
        })
    }

    pub fn from_counts(acquisition_time_s: f64, counts: [f64; 16], accidentals: [f64; 16]) -> Result<Self> {
        let labels = basis_labels();
        Self::new(
            acquisition_time_s,
            (0..16)
                .map(|i| Measurement {
                    basis: labels[i].clone(),
                    counts: counts[i],
                    accidentals: accidentals[i],
                })
                .collect(),
        )
    }

    pub fn counts(&self) -> [f64; 16] {
        std::array::from_fn(|i| self.measurements[i].counts)
    }

    pub fn accidentals(&self) -> [f64; 16] {
        std::array::from_fn(|i| self.measurements[i].accidentals)
    }

    pub fn total_counts(&self) -> f64 {
        self.counts().iter().sum()
    }

    /// Accidental-subtracted counts (clipped at zero), accidentals reset to zero.
    pub fn net(&self) -> TomoDataset {
        let counts = self.counts();
        let acc = self.accidentals();
        TomoDataset::from_counts(
            self.acquisition_time_s,
            std::array::from_fn(|i| (counts[i] - acc[i]).max(0.0)),
            [0.0; 16],
        )
        .expect("valid by construction")
    }

    /// Every count multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<TomoDataset> {
        let counts = self.counts();
        let acc = self.accidentals();
        TomoDataset::from_counts(
            self.acquisition_time_s,
            std::array::from_fn(|i| counts[i] * c),
            std::array::from_fn(|i| acc[i] * c),
        )
    }

    pub fn to_json(&self) -> String {
        let file = DatasetFile {
            schema_version: DATASET_SCHEMA_VERSION.to_string(),
            acquisition_time_s: self.acquisition_time_s,
            measurements: self.measurements.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: DatasetFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            pointer: json_pointer(&e.path().to_string()),
            message: e.inner().to_string(),
        })?;
        if file.schema_version != DATASET_SCHEMA_VERSION {
            return Err(Error::Config {
                pointer: "/schema_version".into(),
                message: format!("expected '{DATASET_SCHEMA_VERSION}', found '{}'", file.schema_version),
            });
        }
        Self::new(file.acquisition_time_s, file.measurements)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Converts a serde path such as `measurements[3].counts` to `/measurements/3/counts`.
pub fn json_pointer(path: &str) -> String {
    if path == "." || path.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    for part in path.split('.') {
        let (name, rest) = part.split_once('[').unwrap_or((part, ""));
        if !name.is_empty() {
            out.push('/');
            out.push_str(name);
        }
        for idx in rest.split('[') {
            let idx = idx.trim_end_matches(']');
            if !idx.is_empty() {
                out.push('/');
                out.push_str(idx);
            }
        }
    }
    out
}

/// Expected coincidences `n · Tr(P_i ρ) + floor` with `floor` recorded as accidentals.
pub fn born_counts(rho: &DensityMatrix, n_per_basis: f64, accidental_floor: f64) -> Result<TomoDataset> {
    if !(n_per_basis > 0.0 && n_per_basis.is_finite()) {
        return Err(Error::invalid("n_per_basis", "must be > 0"));
    }
    if !(accidental_floor >= 0.0 && accidental_floor.is_finite()) {
        return Err(Error::invalid("accidental_floor", "must be >= 0"));
    }
    let p = probabilities(rho);
    TomoDataset::from_counts(
        1.0,
        std::array::from_fn(|i| (n_per_basis * p[i]).max(0.0) + accidental_floor),
        [accidental_floor; 16],
    )
}

/// Poisson draw of every setting's counts; accidental estimates are kept.
pub fn sample_dataset(expected: &TomoDataset, seed: u64) -> Result<TomoDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = expected.counts();
    let mut counts = [0.0; 16];
    for (c, &m) in counts.iter_mut().zip(mean.iter()) {
        *c = poisson_draw(&mut rng, m)?;
    }
    TomoDataset::from_counts(expected.acquisition_time_s, counts, expected.accidentals())
}
