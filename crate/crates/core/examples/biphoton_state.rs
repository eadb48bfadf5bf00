//! Four-term biphoton state per channel and the Bell operating point.

use modepair::config::ExperimentConfig;
use modepair::report::bell_experiment;
use modepair::sfwm::COMBINATION_LABELS;

fn main() -> modepair::error::Result<()> {
    let cfg = ExperimentConfig::default();
    let model = cfg.sfwm_model(cfg.dispersion()?)?;
    let grid = cfg.channel_grid();
    let pump = cfg.pump_config()?;
    for k in [1, 2, 4, 8, 14] {
        let s = model.biphoton_state(&grid, k, &pump, cfg.phase_model)?;
        let terms: Vec<String> = s
            .amplitudes
            .iter()
            .zip(COMBINATION_LABELS)
            .map(|(a, l)| format!("{l} {:.3}∠{:+.2}", a.norm(), a.arg()))
            .collect();
        println!("channel {k:>2}: {}", terms.join("  "));
    }
    let bell = bell_experiment(&cfg, &model)?;
    println!(
        "Bell channel {}: split {:.4}, relative phase {:+.4} rad",
        bell.channel, bell.pump.split_ratio, bell.pump.relative_phase_rad
    );
    Ok(())
}
