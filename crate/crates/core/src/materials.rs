//! Refractive-index models for the waveguide core and cladding.
//!
//! Two models are supported: a dispersionless constant index and a Sellmeier
//! sum `n^2 = 1 + sum_j B_j λ^2 / (λ^2 - C_j)` with `C_j` in µm². The
//! Sellmeier coefficients are configuration inputs; the constructors below
//! only provide the usual literature sets for silicon and fused silica.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wavelength range (µm) over which index models may be evaluated.
pub const VALID_WAVELENGTH_UM: (f64, f64) = (1.0, 2.0);

/// Closest allowed approach of λ² to a Sellmeier resonance, in µm².
const POLE_GUARD_UM2: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierTerm {
    /// Oscillator strength `B_j`.
    pub b: f64,
    /// Resonance wavelength squared `C_j = λ_j²` in µm².
    pub c_um2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialModel {
    Constant { n: f64 },
    Sellmeier { terms: Vec<SellmeierTerm> },
}

impl MaterialModel {
    pub fn constant(n: f64) -> Self {
        MaterialModel::Constant { n }
    }

    /// Crystalline silicon, three-term fit of Salzberg & Villa (1957).
    pub fn silicon() -> Self {
        MaterialModel::Sellmeier {
            terms: vec![
                SellmeierTerm {
                    b: 10.668_429_3,
                    c_um2: 0.301_516_485 * 0.301_516_485,
                },
                SellmeierTerm {
                    b: 0.003_043_474_8,
                    c_um2: 1.134_751_15 * 1.134_751_15,
                },
                SellmeierTerm {
                    b: 1.541_334_08,
                    c_um2: 1104.0 * 1104.0,
                },
            ],
        }
    }

    /// Fused silica, Malitson (1965).
    pub fn silica() -> Self {
        MaterialModel::Sellmeier {
            terms: vec![
                SellmeierTerm {
                    b: 0.696_166_3,
                    c_um2: 0.068_404_3 * 0.068_404_3,
                },
                SellmeierTerm {
                    b: 0.407_942_6,
                    c_um2: 0.116_241_4 * 0.116_241_4,
                },
                SellmeierTerm {
                    b: 0.897_479_4,
                    c_um2: 9.896_161 * 9.896_161,
                },
            ],
        }
    }

    pub fn index(&self, wavelength_um: f64) -> Result<f64> {
        refractive_index(self, wavelength_um)
    }

    pub fn is_dispersionless(&self) -> bool {
        matches!(self, MaterialModel::Constant { .. })
    }
}

/// Evaluates `n(λ)` for `λ` in µm.
pub fn refractive_index(material: &MaterialModel, wavelength_um: f64) -> Result<f64> {
    let (lo, hi) = VALID_WAVELENGTH_UM;
    if !(lo..=hi).contains(&wavelength_um) {
        return Err(Error::WavelengthOutOfRange {
            wavelength_um,
            min_um: lo,
            max_um: hi,
        });
    }
    match material {
        MaterialModel::Constant { n } => {
            if !(n.is_finite() && *n > 1.0) {
                return Err(Error::MaterialDomain {
                    wavelength_um,
                    reason: format!("constant index {n} must be finite and > 1"),
                });
            }
            Ok(*n)
        }
        MaterialModel::Sellmeier { terms } => {
            let l2 = wavelength_um * wavelength_um;
            let mut n2 = 1.0;
            for term in terms {
                let denom = l2 - term.c_um2;
                if denom.abs() < POLE_GUARD_UM2 {
                    return Err(Error::MaterialDomain {
                        wavelength_um,
                        reason: format!("resonance at {} um", term.c_um2.sqrt()),
                    });
                }
                n2 += term.b * l2 / denom;
            }
            if !(n2.is_finite() && n2 > 1.0) {
                return Err(Error::MaterialDomain {
                    wavelength_um,
                    reason: format!("n^2 = {n2}"),
                });
            }
            Ok(n2.sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_model_is_flat() {
        let m = MaterialModel::constant(3.48);
        assert_eq!(m.index(1.55).unwrap(), 3.48);
        assert_eq!(m.index(1.2).unwrap(), 3.48);
    }

    #[test]
    fn silicon_sellmeier_at_1550() {
        // Direct evaluation of the same three-term sum, written out longhand.
        let l2: f64 = 1.55 * 1.55;
        let n2 = 1.0
            + 10.6684293 * l2 / (l2 - 0.301516485f64.powi(2))
            + 0.0030434748 * l2 / (l2 - 1.13475115f64.powi(2))
            + 1.54133408 * l2 / (l2 - 1104.0f64.powi(2));
        let n = MaterialModel::silicon().index(1.55).unwrap();
        assert!((n - n2.sqrt()).abs() < 1e-14);
        assert!((n - 3.4777).abs() < 1e-3, "n = {n}");
    }

    #[test]
    fn silica_sellmeier_at_1550() {
        let n = MaterialModel::silica().index(1.55).unwrap();
        assert!((n - 1.444).abs() < 1e-3, "n = {n}");
    }

    #[test]
    fn normal_dispersion_in_band() {
        for m in [MaterialModel::silicon(), MaterialModel::silica()] {
            assert!(m.index(1.50).unwrap() > m.index(1.60).unwrap());
        }
    }

    #[test]
    fn smooth_and_above_one_in_band() {
        for m in [MaterialModel::silicon(), MaterialModel::silica()] {
            let mut prev = f64::INFINITY;
            for i in 0..=500 {
                let l = 1.2 + 0.5 * i as f64 / 500.0;
                let n = m.index(l).unwrap();
                assert!(n > 1.0);
                assert!(n < prev);
                prev = n;
            }
        }
    }

    #[test]
    fn out_of_range_wavelength() {
        let err = MaterialModel::constant(1.44).index(2.5).unwrap_err();
        assert!(matches!(err, Error::WavelengthOutOfRange { .. }));
        assert!(MaterialModel::silicon().index(0.9).is_err());
    }

    #[test]
    fn resonance_is_rejected() {
        let err = MaterialModel::silicon().index(1.134_751_15).unwrap_err();
        assert!(matches!(err, Error::MaterialDomain { .. }));
    }
}
