//! Effective-index dispersion of the TE0 and TE1 modes at the pump.

use modepair::config::ExperimentConfig;
use modepair::modes::{eim_neff, ModeId};

fn main() -> modepair::error::Result<()> {
    let cfg = ExperimentConfig::default();
    for (mode, s) in cfg.dispersion()? {
        println!(
            "{mode}: n_g {:.4}, beta1 {:.4e} s/m, beta2 {:.4} ps^2/m",
            s.group_index(),
            s.beta1,
            s.beta2 * 1e24
        );
    }
    for nm in [1500.0, 1550.0, 1600.0] {
        let n0 = eim_neff(&cfg.geometry, ModeId::TE0, nm * 1e-3)?;
        let n1 = eim_neff(&cfg.geometry, ModeId::TE1, nm * 1e-3)?;
        println!("{nm} nm: n_eff TE0 {n0:.4}, TE1 {n1:.4}");
    }
    Ok(())
}
