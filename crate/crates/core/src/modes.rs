//! Effective indices of the TE modes of a rectangular strip waveguide.
//!
//! The rectangular cross-section is reduced to two symmetric-slab problems
//! (effective-index method): a vertical slab through the core height gives an
//! intermediate index, which then serves as the core of a horizontal slab of
//! the waveguide width. The lateral mode order selects the TE mode.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::MaterialModel;

/// Bisection stops once the bracket on `n_eff` is narrower than this.
pub const NEFF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(rename = "TE")]
    Te,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeId {
    pub polarization: Polarization,
    pub order: u32,
}

impl ModeId {
    pub const TE0: ModeId = ModeId::te(0);
    pub const TE1: ModeId = ModeId::te(1);

    pub const fn te(order: u32) -> Self {
        ModeId {
            polarization: Polarization::Te,
            order,
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarization {
            Polarization::Te => write!(f, "TE{}", self.order),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideGeometry {
    pub width_nm: f64,
    pub height_nm: f64,
    pub core: MaterialModel,
    pub cladding: MaterialModel,
}

impl Default for WaveguideGeometry {
    /// 760 × 220 nm silicon strip in silica.
    fn default() -> Self {
        WaveguideGeometry {
            width_nm: 760.0,
            height_nm: 220.0,
            core: MaterialModel::silicon(),
            cladding: MaterialModel::silica(),
        }
    }
}

impl WaveguideGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.width_nm.is_finite() && self.width_nm > 0.0) {
            return Err(Error::invalid("width_nm", format!("{} must be > 0", self.width_nm)));
        }
        if !(self.height_nm.is_finite() && self.height_nm > 0.0) {
            return Err(Error::invalid(
                "height_nm",
                format!("{} must be > 0", self.height_nm),
            ));
        }
        Ok(())
    }
}

/// Normalized frequency `V = k0 d sqrt(n_core² - n_clad²)` of a slab of full thickness `d`.
pub fn v_number(n_core: f64, n_clad: f64, thickness_nm: f64, wavelength_um: f64) -> f64 {
    let k0 = 2.0 * PI / wavelength_um;
    k0 * thickness_nm * 1e-3 * (n_core * n_core - n_clad * n_clad).sqrt()
}

/// TE effective index of a symmetric slab.
///
/// Solves `tan(κd/2 - mπ/2) = γ/κ` on its monotone branch, written as
/// `κd/2 - mπ/2 - atan2(γ, κ) = 0`, by bisection over `(n_clad, n_core)`.
pub fn slab_neff(
    n_core: f64,
    n_clad: f64,
    thickness_nm: f64,
    wavelength_um: f64,
    order: u32,
) -> Result<f64> {
    if !(n_core > n_clad && n_clad > 0.0) {
        return Err(Error::invalid(
            "n_core",
            format!("need n_core > n_clad > 0, got {n_core} / {n_clad}"),
        ));
    }
    if !(thickness_nm > 0.0 && wavelength_um > 0.0) {
        return Err(Error::invalid("thickness_nm", "thickness and wavelength must be > 0"));
    }
    let v = v_number(n_core, n_clad, thickness_nm, wavelength_um);
    let cutoff = order as f64 * PI;
    if v <= cutoff {
        return Err(Error::NotGuided {
            order,
            v_number: v,
            cutoff,
        });
    }

    let k0 = 2.0 * PI / wavelength_um;
    let half_d = 0.5 * thickness_nm * 1e-3;
    let shift = 0.5 * order as f64 * PI;
    let residual = |n: f64| {
        let kappa = k0 * (n_core * n_core - n * n).max(0.0).sqrt();
        let gamma = k0 * (n * n - n_clad * n_clad).max(0.0).sqrt();
        kappa * half_d - shift - gamma.atan2(kappa)
    };

    // residual(n_clad) = (V - mπ)/2 > 0 and residual(n_core) = -(m+1)π/2 < 0.
    let (mut lo, mut hi) = (n_clad, n_core);
    while hi - lo > NEFF_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-step effective index of `mode` in `geometry` at `wavelength_um`.
pub fn eim_neff(geometry: &WaveguideGeometry, mode: ModeId, wavelength_um: f64) -> Result<f64> {
    let n_core = geometry.core.index(wavelength_um)?;
    let n_clad = geometry.cladding.index(wavelength_um)?;
    let n_vertical = slab_neff(n_core, n_clad, geometry.height_nm, wavelength_um, 0)?;
    slab_neff(n_vertical, n_clad, geometry.width_nm, wavelength_um, mode.order)
}
