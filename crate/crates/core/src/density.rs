//! Two-qubit density matrices in the polarization basis (|HH⟩, |HV⟩, |VH⟩, |VV⟩).

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Ket = Vector4<Complex64>;
pub type Operator = Matrix4<Complex64>;

pub const BASIS_LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: Operator,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, positivity and purity bound.
    pub fn new(m: Operator) -> Result<Self> {
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (max |ρ - ρ†| = {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let rho = DensityMatrix { m };
        let min_eig = rho.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -EIGEN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        if rho.purity() > 1.0 + EIGEN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("purity {}", rho.purity())));
        }
        Ok(rho)
    }

    /// Builds `A / Tr A` from any positive semidefinite `A`, symmetrizing away rounding.
    pub fn from_psd_unnormalized(a: Operator) -> Result<Self> {
        let a = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = a.trace().re;
        if !(tr > 0.0 && tr.is_finite()) {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        Self::new(a / Complex64::new(tr, 0.0))
    }

    /// Pure state `|ψ⟩⟨ψ|`; the ket must be normalized to 1e-12.
    pub fn from_ket(ket: &Ket) -> Result<Self> {
        let n = ket.norm_squared();
        if (n - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("ket norm² {n}")));
        }
        Self::from_psd_unnormalized(ket * ket.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: Operator::identity() * Complex64::new(0.25, 0.0),
        }
    }

    /// (|HH⟩ + |VV⟩)/√2
    pub fn phi_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ket = Ket::new(
            Complex64::new(s, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
        );
        Self::from_ket(&ket).expect("normalized")
    }

    /// Computational basis state, index into `BASIS_LABELS`.
    pub fn basis_state(index: usize) -> Self {
        let mut m = Operator::zeros();
        m[(index, index)] = Complex64::new(1.0, 0.0);
        DensityMatrix { m }
    }

    pub fn matrix(&self) -> &Operator {
        &self.m
    }

    pub fn into_matrix(self) -> Operator {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    /// `Re Tr(O ρ)`
    pub fn expectation(&self, op: &Operator) -> f64 {
        (op * self.m).trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(self.m);
        let mut v = [0.0; 4];
        for (slot, e) in v.iter_mut().zip(eig.eigenvalues.iter()) {
            *slot = *e;
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// `a ρ + (1 - a) σ`
    pub fn mix(&self, other: &DensityMatrix, a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::invalid("a", "mixing weight must lie in [0, 1]"));
        }
        Ok(DensityMatrix {
            m: self.m * Complex64::new(a, 0.0) + other.m * Complex64::new(1.0 - a, 0.0),
        })
    }

    /// White-noise admixture `(1 - p) ρ + p I/4`.
    pub fn depolarize(&self, p: f64) -> Result<Self> {
        self.mix(&Self::maximally_mixed(), 1.0 - p)
    }

    /// Rotates the first (signal) qubit's linear polarization by `angle_rad`,
    /// as a misset analyzer wave plate would.
    pub fn rotate_signal(&self, angle_rad: f64) -> Self {
        let (s, c) = angle_rad.sin_cos();
        let re = |x: f64| Complex64::new(x, 0.0);
        let z = re(0.0);
        // R(θ) ⊗ I
        let u = Operator::new(
            re(c), z, re(-s), z,
            z, re(c), z, re(-s),
            re(s), z, re(c), z,
            z, re(s), z, re(c),
        );
        let m = u * self.m * u.adjoint();
        DensityMatrix {
            m: (m + m.adjoint()) * Complex64::new(0.5, 0.0),
        }
    }

    /// `½ Σ |λ_i(ρ - σ)|`
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = self.m - other.m;
        let eig = SymmetricEigen::new(diff);
        0.5 * eig.eigenvalues.iter().map(|e| e.abs()).sum::<f64>()
    }

    /// Wootters concurrence.
    pub fn concurrence(&self) -> f64 {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        // σ_y ⊗ σ_y in the HH, HV, VH, VV basis.
        let yy = Operator::new(
            z, z, z, -o,
            z, z, o, z,
            z, o, z, z,
            -o, z, z, z,
        );
        let rho_tilde = yy * self.m.conjugate() * yy;
        let sqrt_rho = hermitian_sqrt(&self.m);
        let r = sqrt_rho * rho_tilde * sqrt_rho;
        let r = (r + r.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(r).eigenvalues;
        // Eigenvalues at rounding level would otherwise turn into ~1e-8 after the square root.
        let floor = 16.0 * f64::EPSILON * eig.iter().cloned().fold(0.0, f64::max);
        let mut l: Vec<f64> = eig
            .iter()
            .map(|&e| if e > floor { e.sqrt() } else { 0.0 })
            .collect();
        l.sort_by(|a, b| b.partial_cmp(a).unwrap());
        (l[0] - l[1] - l[2] - l[3]).max(0.0)
    }

    pub fn entanglement_of_formation(&self) -> f64 {
        let c = self.concurrence();
        let x = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
        let h = |p: f64| if p <= 0.0 || p >= 1.0 { 0.0 } else { -p * p.log2() };
        h(x) + h(1.0 - x)
    }
}

fn hermitian_sqrt(m: &Operator) -> Operator {
    let eig = SymmetricEigen::new(*m);
    let mut out = Operator::zeros();
    for k in 0..4 {
        let v = eig.eigenvectors.column(k);
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        out += v * v.adjoint() * Complex64::new(s, 0.0);
    }
    out
}

/// Fidelity `Tr(ρσ)` against a pure target `σ`.
pub fn fidelity(rho: &DensityMatrix, target_pure: &DensityMatrix) -> Result<f64> {
    let purity = target_pure.purity();
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::NonPureTarget { purity });
    }
    Ok(rho.expectation(target_pure.matrix()).clamp(0.0, 1.0))
}
