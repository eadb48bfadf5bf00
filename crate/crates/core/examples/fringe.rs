//! Polarization-correlation fringes, visibility fits and the Bell check.

use modepair::density::DensityMatrix;
use modepair::tomography::{bell_nonlocality_check, fit_fringe, simulate_fringe};

fn main() -> modepair::error::Result<()> {
    let angles: Vec<f64> = (0..=72).map(|i| i as f64 * 5.0).collect();
    for noise in [0.0, 0.2, 0.4] {
        let rho = DensityMatrix::phi_plus().depolarize(noise)?;
        for theta in [0.0, 45.0] {
            let fit = fit_fringe(&simulate_fringe(&rho, theta, &angles, 1e4, 0.0))?;
            println!(
                "noise {noise:.1}, theta_s {theta:>4}: V = {:.4}, period {:.1} deg, nonlocal {}",
                fit.visibility,
                fit.period_deg,
                bell_nonlocality_check(fit.visibility)?
            );
        }
    }
    Ok(())
}
