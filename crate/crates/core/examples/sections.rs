//! Relative pair contributions of the device sections.

use modepair::counting::{section_contributions, Section};
use modepair::units::db_to_linear;

fn main() -> modepair::error::Result<()> {
    let section = |length_mm: f64, t: f64| Section {
        gamma: 100.0,
        length_m: length_mm * 1e-3,
        pump_power_w: 3.5e-3,
        downstream_transmission: t,
    };
    let lossless = section_contributions(&[section(0.45, 1.0), section(3.0, 1.0), section(0.25, 1.0)])?;
    println!("lossless: {lossless:?}");
    let lossy = section_contributions(&[section(0.45, db_to_linear(6.0)), section(3.0, 1.0), section(0.25, 1.0)])?;
    println!("2 dB/mm over the multimode guide: {lossy:?}");
    Ok(())
}
