//! Export the solver's dispersion to a JSON table and drive the model from it.

use modepair::config::{parse_config_str, ExperimentConfig};
use modepair::dispersion::dispersion_table_json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = ExperimentConfig::default();
    let dir = std::env::temp_dir().join("modepair_table_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("dispersion_table.json");
    std::fs::write(&path, dispersion_table_json(&solver.dispersion()?))?;
    let tabled = parse_config_str(&format!(
        r#"{{"schema_version":"v1","dispersion_table":{}}}"#,
        serde_json::to_string(&path.to_string_lossy())?
    ))?;
    let same = tabled.dispersion()? == solver.dispersion()?;
    println!("table at {} reproduces the solver: {same}", path.display());
    Ok(())
}
