//! Maximum-likelihood reconstruction over the Cholesky parameterization
//! `ρ = T†T / Tr(T†T)`, `T` lower triangular.
//!
//! The count scale is absorbed into `T`, so the likelihood is scale free and
//! no separate total-count estimate is needed.

use nalgebra::{Cholesky, SMatrix, SVector, SymmetricEigen};
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{gram_matrix, projector_kets, TomoDataset};
use crate::density::{fidelity, DensityMatrix, Operator};
use crate::error::{Error, Result};
use crate::seed::stage_rng;

type Params = SVector<f64, 16>;
type Hessian = SMatrix<f64, 16, 16>;

/// Position of the real part of each strictly lower entry in the parameter vector.
const OFF_DIAGONAL: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Likelihood {
    /// `Σ (n − e)² / (2e)`
    #[default]
    Gaussian,
    /// `Σ (e − n ln e)`
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub likelihood: Likelihood,
    pub max_iterations: usize,
    /// Stop once a step lowers the normalized objective by less than this.
    pub tolerance: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            likelihood: Likelihood::Gaussian,
            max_iterations: 10_000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub rho: DensityMatrix,
    pub neg_log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn unpack(t: &Params) -> Operator {
    let mut m = Operator::zeros();
    for j in 0..4 {
        m[(j, j)] = Complex64::new(t[j], 0.0);
    }
    for (q, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
        m[(r, c)] = Complex64::new(t[4 + 2 * q], t[5 + 2 * q]);
    }
    m
}

fn pack(m: &Operator) -> Params {
    let mut t = Params::zeros();
    for j in 0..4 {
        t[j] = m[(j, j)].re;
    }
    for (q, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
        t[4 + 2 * q] = m[(r, c)].re;
        t[5 + 2 * q] = m[(r, c)].im;
    }
    t
}

/// Lower-triangular `T` with `T†T = ρ`, from a Cholesky factor of the
/// index-reversed matrix.
fn factor(rho: &Operator) -> Option<Operator> {
    let flip = Operator::from_fn(|i, j| Complex64::new(if i + j == 3 { 1.0 } else { 0.0 }, 0.0));
    let l = Cholesky::new(flip * rho * flip)?.unpack();
    Some((flip * l * flip).adjoint())
}

/// Likelihood of counts normalized to unit total, as a function of the
/// unnormalized `A = T†T`; its scale plays the role of the total count.
struct Objective<'a> {
    counts: &'a [f64; 16],
    floor: f64,
    likelihood: Likelihood,
}

impl Objective<'_> {
    fn nll(&self, expected: &[f64; 16]) -> (f64, [f64; 16]) {
        let mut f = 0.0;
        let mut de = [0.0; 16];
        for i in 0..16 {
            let n = self.counts[i];
            let e = expected[i];
            let (v, d) = match self.likelihood {
                Likelihood::Gaussian => {
                    if e > self.floor {
                        ((n - e).powi(2) / (2.0 * e), (e * e - n * n) / (2.0 * e * e))
                    } else {
                        ((n - e).powi(2) / (2.0 * self.floor), -(n - e) / self.floor)
                    }
                }
                Likelihood::Poisson => {
                    // Offset so each term vanishes at e = n.
                    let offset = if n > 0.0 { n - n * n.ln() } else { 0.0 };
                    if e > self.floor {
                        (e - n * e.ln() - offset, 1.0 - n / e)
                    } else {
                        let ec = self.floor;
                        (e - n * ec.ln() - offset, 1.0 - n / ec)
                    }
                }
            };
            f += v;
            de[i] = d;
        }
        (f, de)
    }

    fn expected(a: &Operator) -> [f64; 16] {
        projector_kets().map(|k| (k.adjoint() * a * k)[(0, 0)].re)
    }

    fn eval(&self, t: &Params) -> (f64, Params) {
        let tm = unpack(t);
        let a = tm.adjoint() * tm;
        let (f, de) = self.nll(&Self::expected(&a));
        let mut g = Operator::zeros();
        for (i, k) in projector_kets().iter().enumerate() {
            g += k * k.adjoint() * Complex64::new(de[i], 0.0);
        }
        let m = g * tm.adjoint();
        let mut grad = Params::zeros();
        for j in 0..4 {
            grad[j] = 2.0 * m[(j, j)].re;
        }
        for (q, &(r, c)) in OFF_DIAGONAL.iter().enumerate() {
            grad[4 + 2 * q] = 2.0 * m[(c, r)].re;
            grad[5 + 2 * q] = -2.0 * m[(c, r)].im;
        }
        (f, grad)
    }
}

/// Least-squares inversion `ρ = Σ c_j P_j`, clipped to the nearest physical
/// spectrum and mixed with a little white noise so its Cholesky factor exists.
pub fn linear_inversion(dataset: &TomoDataset) -> Result<DensityMatrix> {
    let counts = dataset.counts();
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidDataset("total counts must be > 0".into()));
    }
    let p = SVector::<f64, 16>::from_iterator(counts.iter().map(|n| n / total));
    let c = gram_matrix()
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::InvalidDensityMatrix("singular overlap matrix".into()))?;
    let mut m = Operator::zeros();
    for (j, k) in projector_kets().iter().enumerate() {
        m += k * k.adjoint() * Complex64::new(c[j], 0.0);
    }
    let m = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(m);
    let mut clipped = Operator::zeros();
    for j in 0..4 {
        let v = eig.eigenvectors.column(j);
        clipped += v * v.adjoint() * Complex64::new(eig.eigenvalues[j].max(0.0), 0.0);
    }
    let tr = clipped.trace().re;
    let base = if tr > 0.0 {
        DensityMatrix::from_psd_unnormalized(clipped)?
    } else {
        DensityMatrix::maximally_mixed()
    };
    base.mix(&DensityMatrix::maximally_mixed(), 0.99)
}

/// Maximum-likelihood density matrix for `dataset` (raw counts as given).
pub fn mle_reconstruct(dataset: &TomoDataset, options: &MleOptions) -> Result<MleResult> {
    let counts = dataset.counts();
    let total: f64 = counts.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidDataset("total counts must be > 0".into()));
    }
    let normalized = counts.map(|n| n / total);
    let obj = Objective {
        counts: &normalized,
        floor: 1e-14,
        likelihood: options.likelihood,
    };
    let start = linear_inversion(dataset)?;
    let predicted: f64 = super::probabilities(&start).iter().sum();
    let t0 = factor(start.matrix())
        .map(|t| pack(&t) / predicted.sqrt())
        .ok_or_else(|| Error::InvalidDensityMatrix("initial point has no Cholesky factor".into()))?;

    let mut t = t0;
    let (mut f, mut g) = obj.eval(&t);
    let mut h = Hessian::identity();
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled_resets = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let mut dir = -(h * g);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            h = Hessian::identity();
            dir = -g;
            slope = -g.norm_squared();
        }
        if slope == 0.0 {
            converged = true;
            break;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = t + dir * step;
            let (fc, gc) = obj.eval(&cand);
            if fc.is_finite() && fc <= f + 1e-4 * step * slope {
                accepted = Some((cand, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((tn, fnew, gn)) = accepted else {
            if stalled_resets < 2 && h != Hessian::identity() {
                h = Hessian::identity();
                stalled_resets += 1;
                continue;
            }
            converged = true;
            break;
        };
        let s = tn - t;
        let y = gn - g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let i = Hessian::identity();
            let a = i - s * y.transpose() * rho;
            h = a * h * a.transpose() + s * s.transpose() * rho;
        }
        let improvement = f - fnew;
        t = tn;
        f = fnew;
        g = gn;
        if improvement < options.tolerance && g.norm() < 1e-6 {
            converged = true;
            break;
        }
    }
    let tm = unpack(&t);
    let rho = DensityMatrix::from_psd_unnormalized(tm.adjoint() * tm)?;
    Ok(MleResult {
        neg_log_likelihood: f * total,
        rho,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub fidelity_mean: f64,
    pub fidelity_std: f64,
    pub rho_mean: Operator,
    /// Entry-wise standard deviation of the real and imaginary parts.
    pub rho_std_re: SMatrix<f64, 4, 4>,
    pub rho_std_im: SMatrix<f64, 4, 4>,
    pub n_resamples: usize,
}

/// Resamples each count as `N(n, √n)` clipped at zero, reconstructs each
/// replica and aggregates the fidelity against `target`.
pub fn monte_carlo_errors(
    dataset: &TomoDataset,
    n_resamples: usize,
    seed: u64,
    target: &DensityMatrix,
    options: &MleOptions,
) -> Result<MonteCarloSummary> {
    if n_resamples < 2 {
        return Err(Error::invalid("n_resamples", "need at least 2 resamples"));
    }
    let counts = dataset.counts();
    let acc = dataset.accidentals();
    let mut fids = Vec::with_capacity(n_resamples);
    let mut rhos = Vec::with_capacity(n_resamples);
    for r in 0..n_resamples {
        let mut rng = stage_rng(seed, "tomography_monte_carlo", r as u64);
        let mut c = [0.0; 16];
        for (slot, &n) in c.iter_mut().zip(counts.iter()) {
            *slot = if n > 0.0 {
                Normal::new(n, n.sqrt())
                    .map_err(|e| Error::invalid("counts", e.to_string()))?
                    .sample(&mut rng)
                    .max(0.0)
            } else {
                0.0
            };
        }
        let replica = TomoDataset::from_counts(dataset.acquisition_time_s, c, acc)?;
        let res = mle_reconstruct(&replica, options)?;
        fids.push(fidelity(&res.rho, target)?);
        rhos.push(res.rho.into_matrix());
    }
    let n = n_resamples as f64;
    let mean = fids.iter().sum::<f64>() / n;
    let var = fids.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let rho_mean: Operator = rhos.iter().sum::<Operator>() / Complex64::new(n, 0.0);
    let mut std_re = SMatrix::<f64, 4, 4>::zeros();
    let mut std_im = SMatrix::<f64, 4, 4>::zeros();
    for m in &rhos {
        let d = m - rho_mean;
        std_re += d.map(|z| z.re * z.re);
        std_im += d.map(|z| z.im * z.im);
    }
    Ok(MonteCarloSummary {
        fidelity_mean: mean,
        fidelity_std: var.sqrt(),
        rho_mean,
        rho_std_re: std_re.map(|v| (v / (n - 1.0)).sqrt()),
        rho_std_im: std_im.map(|v| (v / (n - 1.0)).sqrt()),
        n_resamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Ket;
    use crate::tomography::{born_counts, sample_dataset};

    fn ket(a: [(f64, f64); 4]) -> DensityMatrix {
        let k = Ket::from_iterator(a.iter().map(|&(r, i)| Complex64::new(r, i)));
        DensityMatrix::from_ket(&(k / Complex64::new(k.norm(), 0.0))).unwrap()
    }

    #[test]
    fn factorization_round_trip() {
        let rho = DensityMatrix::phi_plus().mix(&DensityMatrix::basis_state(1), 0.7).unwrap();
        let rho = rho.mix(&DensityMatrix::maximally_mixed(), 0.9).unwrap();
        let t = factor(rho.matrix()).unwrap();
        for r in 0..4 {
            for c in r + 1..4 {
                assert_eq!(t[(r, c)], Complex64::new(0.0, 0.0));
            }
        }
        assert!((t.adjoint() * t - rho.matrix()).norm() < 1e-14);
        assert_eq!(unpack(&pack(&t)), t);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let rho = ket([(0.6, 0.0), (0.1, 0.2), (-0.3, 0.1), (0.5, -0.4)])
            .mix(&DensityMatrix::maximally_mixed(), 0.8)
            .unwrap();
        let data = sample_dataset(&born_counts(&rho, 1e3, 0.0).unwrap(), 5).unwrap();
        let counts = data.counts();
        for likelihood in [Likelihood::Gaussian, Likelihood::Poisson] {
            let normalized = counts.map(|n| n / data.total_counts());
            let obj = Objective {
                counts: &normalized,
                floor: 1e-14,
                likelihood,
            };
            let t = Params::from_fn(|i, _| 0.1 + 0.02 * i as f64 * if i % 3 == 0 { -1.0 } else { 1.0 });
            let (_, g) = obj.eval(&t);
            for i in 0..16 {
                let h = 1e-6;
                let mut tp = t;
                tp[i] += h;
                let mut tm = t;
                tm[i] -= h;
                let fd = (obj.eval(&tp).0 - obj.eval(&tm).0) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6 * (1.0 + fd.abs()), "{likelihood:?} {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn noiseless_fixed_points() {
        for target in [DensityMatrix::basis_state(0), DensityMatrix::phi_plus()] {
            let data = born_counts(&target, 1e4, 0.0).unwrap();
            for likelihood in [Likelihood::Gaussian, Likelihood::Poisson] {
                let opts = MleOptions {
                    likelihood,
                    ..MleOptions::default()
                };
                let res = mle_reconstruct(&data, &opts).unwrap();
                let f = fidelity(&res.rho, &target).unwrap();
                assert!(f >= 0.9999, "{likelihood:?}: F = {f}, {} iterations", res.iterations);
            }
        }
    }

    #[test]
    fn mixed_state_round_trip() {
        let rho = ket([(0.3, 0.1), (0.5, 0.0), (0.2, -0.6), (0.1, 0.4)])
            .mix(&DensityMatrix::basis_state(3), 0.6)
            .unwrap();
        let res = mle_reconstruct(&born_counts(&rho, 1e4, 0.0).unwrap(), &MleOptions::default()).unwrap();
        assert!(res.converged);
        assert!(res.rho.trace_distance(&rho) < 1e-3, "{}", res.rho.trace_distance(&rho));
    }

    #[test]
    fn global_rescaling_leaves_estimate_unchanged() {
        let rho = DensityMatrix::phi_plus().depolarize(0.1).unwrap();
        let data = sample_dataset(&born_counts(&rho, 1e4, 0.0).unwrap(), 2).unwrap();
        let a = mle_reconstruct(&data, &MleOptions::default()).unwrap();
        let b = mle_reconstruct(&data.scaled(3.0).unwrap(), &MleOptions::default()).unwrap();
        assert!((a.rho.matrix() - b.rho.matrix()).norm() < 1e-8);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let data = TomoDataset::from_counts(1.0, [0.0; 16], [0.0; 16]).unwrap();
        assert!(mle_reconstruct(&data, &MleOptions::default()).is_err());
    }

    #[test]
    fn vanishing_noise_gives_vanishing_spread() {
        let data = born_counts(&DensityMatrix::phi_plus(), 1e12, 0.0).unwrap();
        let mc = monte_carlo_errors(&data, 5, 1, &DensityMatrix::phi_plus(), &MleOptions::default()).unwrap();
        assert!(mc.fidelity_std < 1e-5, "{}", mc.fidelity_std);
    }
}
