//! Two-qubit polarization tomography: projectors, count synthesis, maximum
//! likelihood reconstruction, Monte Carlo error bars and fringe analysis.

mod dataset;
mod fringe;
mod mle;

use std::sync::OnceLock;

use nalgebra::{SMatrix, Vector2};
use num_complex::Complex64;

use crate::density::{DensityMatrix, Ket, Operator};

pub use dataset::{born_counts, json_pointer, sample_dataset, Measurement, TomoDataset, DATASET_SCHEMA_VERSION};
pub use fringe::{
    bell_nonlocality_check, fit_fringe, simulate_fringe, simulate_fringe_scaled, FringeFit, FringeScan,
    BELL_VISIBILITY_BOUND,
};
pub use mle::{
    linear_inversion, mle_reconstruct, monte_carlo_errors, Likelihood, MleOptions, MleResult, MonteCarloSummary,
};

/// Single-qubit analyzer states, in measurement-label order.
pub const SINGLE_LABELS: [char; 4] = ['H', 'V', 'D', 'R'];

pub fn single_qubit_state(label: char) -> Option<Vector2<Complex64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re, im| Complex64::new(re, im);
    Some(match label {
        'H' => Vector2::new(c(1.0, 0.0), c(0.0, 0.0)),
        'V' => Vector2::new(c(0.0, 0.0), c(1.0, 0.0)),
        'D' => Vector2::new(c(s, 0.0), c(s, 0.0)),
        'R' => Vector2::new(c(s, 0.0), c(0.0, s)),
        _ => return None,
    })
}

/// Product ket `|a⟩ ⊗ |b⟩` in the (HH, HV, VH, VV) basis.
pub fn product_ket(a: &Vector2<Complex64>, b: &Vector2<Complex64>) -> Ket {
    Ket::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
}

/// The 16 measurement labels "HH", "HV", ... "RR", signal analyzer first.
pub fn basis_labels() -> [String; 16] {
    std::array::from_fn(|i| format!("{}{}", SINGLE_LABELS[i / 4], SINGLE_LABELS[i % 4]))
}

pub fn basis_index(label: &str) -> Option<usize> {
    let mut chars = label.chars();
    let (a, b) = (chars.next()?, chars.next()?);
    if chars.next().is_some() {
        return None;
    }
    let ia = SINGLE_LABELS.iter().position(|&c| c == a)?;
    let ib = SINGLE_LABELS.iter().position(|&c| c == b)?;
    Some(4 * ia + ib)
}

/// Measurement kets in `basis_labels` order.
pub fn projector_kets() -> &'static [Ket; 16] {
    static KETS: OnceLock<[Ket; 16]> = OnceLock::new();
    KETS.get_or_init(|| {
        std::array::from_fn(|i| {
            let a = single_qubit_state(SINGLE_LABELS[i / 4]).unwrap();
            let b = single_qubit_state(SINGLE_LABELS[i % 4]).unwrap();
            product_ket(&a, &b)
        })
    })
}

/// `|ψ_a⟩⟨ψ_a| ⊗ |ψ_b⟩⟨ψ_b|` for all 16 analyzer settings.
pub fn projector_set() -> [Operator; 16] {
    projector_kets().map(|k| k * k.adjoint())
}

/// `Tr(P_i ρ)` for every setting.
pub fn probabilities(rho: &DensityMatrix) -> [f64; 16] {
    projector_kets().map(|k| (k.adjoint() * rho.matrix() * k)[(0, 0)].re)
}

/// `Tr(P_i P_j)`, the overlap matrix used by linear inversion.
pub fn gram_matrix() -> SMatrix<f64, 16, 16> {
    let kets = projector_kets();
    SMatrix::from_fn(|i, j| (kets[i].adjoint() * kets[j])[(0, 0)].norm_sqr())
}
