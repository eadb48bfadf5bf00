//! Detected counts, CAR versus generation rate, and the heralded g2 operating point.

use modepair::counting::{
    car, expected_counts, sample_counts, solve_mu_for_g2, transmission, CoincidenceSetup, DetectorModel, LossChain,
    PathKind,
};
use modepair::modes::ModeId;

fn main() -> modepair::error::Result<()> {
    let chain = LossChain::default_path(ModeId::TE0, PathKind::Counting);
    let t = transmission(&chain);
    let det = DetectorModel::default();
    let setup = CoincidenceSetup::default();
    println!("TE0 counting chain {:.1} dB, transmission {t:.4}", chain.total_db());
    for rate_khz in [19.0, 60.0, 180.0, 530.0] {
        let e = expected_counts(rate_khz * 1e3, t, t, &setup, &det)?;
        let s = sample_counts(&e, 1)?;
        println!(
            "{rate_khz:>5} kHz: coincidences {:.0}, accidentals {:.2}, CAR {:.0} (sampled {:.0})",
            e.coincidences_raw,
            e.accidentals,
            car(&e)?,
            car(&s).unwrap_or(f64::INFINITY)
        );
    }
    let mu = solve_mu_for_g2(0.13, t, t, &det)?;
    println!("g2 = 0.13 at {mu:.4} pairs per window");
    Ok(())
}
