//! Config parsing, defaults, hashing and field-level diagnostics.

use modepair::config::{parse_config_str, ExperimentConfig};

fn main() {
    let cfg = ExperimentConfig::default();
    println!("defaults hash {}: pump {} nm", cfg.hash(), cfg.pump.wavelength_nm);
    for text in [
        r#"{"schema_version":"v1","pump":{"power_mw":3.5}}"#,
        r#"{"schema_version":"v1","pump":{"split_ratio":1.5}}"#,
        r#"{"schema_version":"v1","pump":{"colour":"red"}}"#,
        r#"{"length_mm":3}"#,
    ] {
        match parse_config_str(text) {
            Ok(c) => println!("ok: power {} mW, hash {}", c.pump.power_mw, c.hash()),
            Err(e) => println!("rejected: {e}"),
        }
    }
}
