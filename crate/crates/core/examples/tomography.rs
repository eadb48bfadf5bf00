//! Simulated 16-setting tomography with MLE reconstruction and Monte Carlo errors.

use modepair::density::{fidelity, DensityMatrix};
use modepair::sfwm::{mode_to_polarization, reference_probe_state};
use modepair::tomography::{born_counts, mle_reconstruct, monte_carlo_errors, sample_dataset, MleOptions};

fn main() -> modepair::error::Result<()> {
    let opts = MleOptions::default();
    let cases = [
        ("Bell", DensityMatrix::phi_plus()),
        ("four-term", mode_to_polarization(&reference_probe_state(), 0.0)?),
    ];
    for (name, rho) in cases {
        let data = sample_dataset(&born_counts(&rho, 1e4, 50.0)?, 3)?;
        for (kind, d) in [("raw", data.clone()), ("net", data.net())] {
            let fit = mle_reconstruct(&d, &opts)?;
            let mc = monte_carlo_errors(&d, 50, 9, &rho, &opts)?;
            println!(
                "{name} {kind}: F = {:.4} ± {:.4}, purity {:.4}, {} iterations",
                fidelity(&fit.rho, &rho)?,
                mc.fidelity_std,
                fit.rho.purity(),
                fit.iterations
            );
        }
    }
    Ok(())
}
