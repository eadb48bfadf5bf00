//! Full pipeline into an output directory.

use modepair::config::ExperimentConfig;
use modepair::report::{run_report, write_artifacts};

fn main() -> modepair::error::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "report_out".into());
    let bundle = run_report(&ExperimentConfig::default())?;
    write_artifacts(&out, &bundle.artifacts)?;
    for name in ["bell_round_trip_fidelity", "bell_raw_fidelity", "bell_net_fidelity", "fringe_visibility_raw_45deg"] {
        println!("{name}: {:.4}", bundle.metric(name).unwrap_or(f64::NAN));
    }
    println!("{} files in {out} (config {})", bundle.artifacts.len(), bundle.config_hash);
    Ok(())
}
