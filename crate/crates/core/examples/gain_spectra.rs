//! Normalized gain of every SFWM process across the channel grid.

use modepair::config::ExperimentConfig;

fn main() -> modepair::error::Result<()> {
    let cfg = ExperimentConfig::default();
    let model = cfg.sfwm_model(cfg.dispersion()?)?;
    let grid = cfg.channel_grid();
    let pump = cfg.pump_config()?;
    let spectra = model.gain_spectra(&model.processes(), &grid, &pump, true)?;
    for spectrum in &spectra {
        print!("{:<16} {:>4}", spectrum.process.label(), spectrum.process.ptype.to_string());
        for k in [1, 2, 5, 10, 20] {
            print!("  ch{k}: {:.3e}", spectrum.at_channel(k).unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
