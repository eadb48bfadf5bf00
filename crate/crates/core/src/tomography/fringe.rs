//! Two-photon polarization fringes and their visibility.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, Vector2, Vector3, Vector4};
use num_complex::Complex64;

use super::product_ket;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};

/// Visibility above which the fringe witnesses Bell nonlocality.
pub const BELL_VISIBILITY_BOUND: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub theta_signal_deg: f64,
    /// Scan axis as recorded (e.g. wave-plate angle).
    pub angles_deg: Vec<f64>,
    pub counts: Vec<f64>,
    pub accidentals: f64,
    /// Polarization rotation per unit of scan angle (2 for a half-wave plate).
    pub angle_scale: f64,
}

impl FringeScan {
    /// Same scan with the accidental floor removed.
    pub fn net(&self) -> FringeScan {
        FringeScan {
            counts: self.counts.iter().map(|c| c - self.accidentals).collect(),
            accidentals: 0.0,
            ..self.clone()
        }
    }
}

/// `baseline · (1 + V sin(2π(φ − φc)/T))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub visibility: f64,
    pub phase_deg: f64,
    pub period_deg: f64,
    pub baseline: f64,
    /// Set when the scan carried no variation to fit.
    pub degenerate: bool,
}

impl FringeFit {
    pub fn model(&self, phi_deg: f64) -> f64 {
        self.baseline * (1.0 + self.visibility * (2.0 * PI * (phi_deg - self.phase_deg) / self.period_deg).sin())
    }
}

fn linear_pol(theta_deg: f64) -> Vector2<Complex64> {
    let t = theta_deg.to_radians();
    Vector2::new(Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0))
}

/// Coincidences behind linear polarizers: `A ⟨θs θi|ρ|θs θi⟩ + floor`.
pub fn simulate_fringe(
    rho: &DensityMatrix,
    theta_signal_deg: f64,
    theta_idler_deg: &[f64],
    amplitude: f64,
    accidental_floor: f64,
) -> FringeScan {
    simulate_fringe_scaled(rho, theta_signal_deg, theta_idler_deg, amplitude, accidental_floor, 1.0)
}

/// As `simulate_fringe`, with the idler polarization at `angle_scale · φ`.
pub fn simulate_fringe_scaled(
    rho: &DensityMatrix,
    theta_signal_deg: f64,
    scan_deg: &[f64],
    amplitude: f64,
    accidental_floor: f64,
    angle_scale: f64,
) -> FringeScan {
    let s = linear_pol(theta_signal_deg);
    let counts = scan_deg
        .iter()
        .map(|&phi| {
            let k = product_ket(&s, &linear_pol(angle_scale * phi));
            amplitude * (k.adjoint() * rho.matrix() * k)[(0, 0)].re + accidental_floor
        })
        .collect();
    FringeScan {
        theta_signal_deg,
        angles_deg: scan_deg.to_vec(),
        counts,
        accidentals: accidental_floor,
        angle_scale,
    }
}

/// For a fixed period, the linear least-squares fit `b + c₁ sin ωφ + c₂ cos ωφ`.
fn linear_fit(x: &[f64], y: &[f64], period: f64) -> Option<(Vector3<f64>, f64)> {
    let w = 2.0 * PI / period;
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let row = Vector3::new(1.0, (w * xi).sin(), (w * xi).cos());
        ata += row * row.transpose();
        aty += row * yi;
    }
    let c = ata.lu().solve(&aty)?;
    let sse = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - c[0] - c[1] * (w * xi).sin() - c[2] * (w * xi).cos()).powi(2))
        .sum();
    Some((c, sse))
}

fn residuals(p: &Vector4<f64>, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<Vector4<f64>>) {
    let (b, v, phc, t) = (p[0], p[1], p[2], p[3]);
    let mut r = Vec::with_capacity(x.len());
    let mut jac = Vec::with_capacity(x.len());
    for (&xi, &yi) in x.iter().zip(y) {
        let arg = 2.0 * PI * (xi - phc) / t;
        let (s, c) = arg.sin_cos();
        r.push(b * (1.0 + v * s) - yi);
        jac.push(Vector4::new(
            1.0 + v * s,
            b * s,
            -b * v * c * 2.0 * PI / t,
            -b * v * c * arg / t,
        ));
    }
    (r, jac)
}

/// Least-squares fringe fit, seeded from a coarse period grid, then refined
/// by Levenberg-Marquardt. `V` is reported from the fitted extrema.
pub fn fit_fringe(scan: &FringeScan) -> Result<FringeFit> {
    let (x, y) = (&scan.angles_deg, &scan.counts);
    if x.len() != y.len() {
        return Err(Error::invalid("scan", "angles and counts differ in length"));
    }
    if x.len() < 8 {
        return Err(Error::invalid("scan", "need at least 8 samples"));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("scan", "non-finite sample"));
    }
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let spread = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if !(span > 0.0) || spread <= 1e-12 * mean.abs().max(f64::MIN_POSITIVE) {
        return Ok(FringeFit {
            visibility: 0.0,
            phase_deg: 0.0,
            period_deg: span.max(f64::MIN_POSITIVE),
            baseline: mean,
            degenerate: true,
        });
    }

    let mut spacing: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).filter(|d| *d > 0.0).collect();
    spacing.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_period = (2.5 * spacing.first().copied().unwrap_or(span)).max(span / 64.0);
    let grid = 400;
    let mut best: Option<(f64, Vector3<f64>, f64)> = None;
    for g in 0..=grid {
        let period = min_period * (span / min_period).powf(g as f64 / grid as f64);
        if let Some((c, sse)) = linear_fit(x, y, period) {
            if best.as_ref().is_none_or(|b| sse < b.2) {
                best = Some((period, c, sse));
            }
        }
    }
    let (period, c, _) = best.ok_or_else(|| Error::invalid("scan", "no period candidate fits"))?;
    let amp = c[1].hypot(c[2]);
    let w = 2.0 * PI / period;
    let mut p = Vector4::new(c[0], amp / c[0], (-c[2]).atan2(c[1]) / w, period);

    let cost = |p: &Vector4<f64>| residuals(p, x, y).0.iter().map(|r| r * r).sum::<f64>();
    let mut lambda = 1e-3;
    let mut f = cost(&p);
    for _ in 0..500 {
        let (r, jac) = residuals(&p, x, y);
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (ri, ji) in r.iter().zip(&jac) {
            jtj += ji * ji.transpose();
            jtr += ji * *ri;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj;
            for d in 0..4 {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let cand = p + step;
            let fc = cost(&cand);
            if fc.is_finite() && fc <= f && cand[3] > 0.0 {
                let done = f - fc <= 1e-15 * f.max(f64::MIN_POSITIVE) || step.norm() <= 1e-14 * (1.0 + p.norm());
                p = cand;
                f = fc;
                lambda = (lambda * 0.3).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }

    let (baseline, v, mut phase, period) = (p[0], p[1], p[2], p[3]);
    // A negative V is the same curve shifted by half a period.
    if v < 0.0 {
        phase += 0.5 * period;
    }
    let d_max = baseline * (1.0 + v.abs());
    let d_min = baseline * (1.0 - v.abs());
    Ok(FringeFit {
        visibility: (d_max - d_min) / (d_max + d_min),
        phase_deg: phase.rem_euclid(period),
        period_deg: period,
        baseline,
        degenerate: false,
    })
}

/// True iff `V > 1/√2`.
pub fn bell_nonlocality_check(visibility: f64) -> Result<bool> {
    if !(0.0..=1.05).contains(&visibility) {
        return Err(Error::invalid("visibility", "must lie in [0, 1.05]"));
    }
    Ok(visibility > BELL_VISIBILITY_BOUND)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::poisson_draw;
    use crate::seed::stage_rng;

    fn scan_angles() -> Vec<f64> {
        (0..=72).map(|i| i as f64 * 5.0).collect()
    }

    fn synthetic(v: f64, phase: f64, period: f64, baseline: f64) -> FringeScan {
        let x = scan_angles();
        let y = x
            .iter()
            .map(|&p| baseline * (1.0 + v * (2.0 * PI * (p - phase) / period).sin()))
            .collect();
        FringeScan {
            theta_signal_deg: 0.0,
            angles_deg: x,
            counts: y,
            accidentals: 0.0,
            angle_scale: 1.0,
        }
    }

    #[test]
    fn bell_fringes_follow_cos_squared() {
        let bell = DensityMatrix::phi_plus();
        let s = simulate_fringe(&bell, 0.0, &[0.0, 45.0, 90.0], 1000.0, 3.0);
        assert!((s.counts[0] - 503.0).abs() < 1e-9);
        assert!((s.counts[1] - 253.0).abs() < 1e-9);
        assert!((s.counts[2] - 3.0).abs() < 1e-9);
        let shifted = simulate_fringe(&bell, 45.0, &[45.0, 135.0], 1000.0, 0.0);
        assert!((shifted.counts[0] - 500.0).abs() < 1e-9 && shifted.counts[1].abs() < 1e-9);
    }

    #[test]
    fn ideal_bell_visibility_is_one() {
        for ts in [0.0, 45.0] {
            let fit = fit_fringe(&simulate_fringe(&DensityMatrix::phi_plus(), ts, &scan_angles(), 1e4, 0.0)).unwrap();
            assert!((fit.visibility - 1.0).abs() < 1e-6, "{fit:?}");
            assert!((fit.period_deg - 180.0).abs() < 1e-6);
        }
    }

    #[test]
    fn half_wave_plate_axis_halves_period() {
        let s = simulate_fringe_scaled(&DensityMatrix::phi_plus(), 0.0, &scan_angles(), 1e4, 0.0, 2.0);
        let fit = fit_fringe(&s).unwrap();
        assert!((fit.period_deg - 90.0).abs() < 1e-6 && (fit.visibility - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noiseless_recovery() {
        for v in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let fit = fit_fringe(&synthetic(v, 30.0, 180.0, 5000.0)).unwrap();
            assert!((fit.visibility - v).abs() < 1e-6, "{v}: {fit:?}");
            if v > 0.0 {
                assert!((fit.phase_deg - 30.0).abs() < 1e-6, "{fit:?}");
            } else {
                assert!(fit.degenerate);
            }
        }
    }

    #[test]
    fn unpolarized_idler_is_flat() {
        let h = DensityMatrix::basis_state(0);
        let flat = h.mix(&DensityMatrix::basis_state(3), 0.5).unwrap().mix(&DensityMatrix::basis_state(1), 1.0).unwrap();
        let mixed = DensityMatrix::maximally_mixed();
        for rho in [mixed, flat.mix(&DensityMatrix::maximally_mixed(), 0.0).unwrap()] {
            let fit = fit_fringe(&simulate_fringe(&rho, 45.0, &scan_angles(), 1e4, 0.0)).unwrap();
            assert!(fit.visibility < 1e-9);
        }
    }

    #[test]
    fn product_state_keeps_single_photon_fringe() {
        let fit = fit_fringe(&simulate_fringe(&DensityMatrix::basis_state(0), 45.0, &scan_angles(), 1e4, 0.0)).unwrap();
        assert!((fit.visibility - 1.0).abs() < 1e-6);
    }

    #[test]
    fn floor_lowers_visibility() {
        let s = simulate_fringe(&DensityMatrix::phi_plus(), 0.0, &scan_angles(), 1e4, 100.0);
        let raw = fit_fringe(&s).unwrap().visibility;
        let expect = 5000.0 / 5200.0;
        assert!((raw - expect).abs() < 1e-6, "{raw}");
        assert!((fit_fringe(&s.net()).unwrap().visibility - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noisy_recovery_of_half_visibility() {
        let base = synthetic(0.5, 10.0, 180.0, 1e4);
        for seed in 0..20 {
            let mut rng = stage_rng(seed, "fringe_test", 0);
            let mut s = base.clone();
            for c in s.counts.iter_mut() {
                *c = poisson_draw(&mut rng, *c).unwrap();
            }
            let v = fit_fringe(&s).unwrap().visibility;
            assert!((v - 0.5).abs() < 0.02, "{seed}: {v}");
        }
    }

    #[test]
    fn short_scans_are_rejected() {
        let mut s = synthetic(0.5, 0.0, 180.0, 1.0);
        s.angles_deg.truncate(5);
        s.counts.truncate(5);
        assert!(fit_fringe(&s).is_err());
    }

    #[test]
    fn bell_threshold() {
        assert!(bell_nonlocality_check(0.97).unwrap());
        assert!(!bell_nonlocality_check(0.707).unwrap());
        assert!(!bell_nonlocality_check(0.5).unwrap());
        assert!(bell_nonlocality_check(1.2).is_err());
    }
}
