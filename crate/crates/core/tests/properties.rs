use num_complex::Complex64;
use proptest::prelude::*;

use modepair::config::{parse_config_str, ExperimentConfig};
use modepair::counting::{car, expected_counts, heralded_g2, sample_counts, CoincidenceSetup, DetectorModel};
use modepair::density::{fidelity, DensityMatrix};
use modepair::dispersion::{dispersion_table_json, parse_dispersion_table};
use modepair::modes::ModeId;
use modepair::report::fmt_num;
use modepair::sfwm::{wrap_phase, BiphotonState, SfwmModel, SfwmProcess};
use modepair::tomography::{born_counts, mle_reconstruct, sample_dataset, MleOptions, TomoDataset};
use modepair::units::thz_to_omega;

fn model() -> &'static (ExperimentConfig, SfwmModel) {
    static M: std::sync::OnceLock<(ExperimentConfig, SfwmModel)> = std::sync::OnceLock::new();
    M.get_or_init(|| {
        let cfg = ExperimentConfig::default();
        let m = cfg.sfwm_model(cfg.dispersion().unwrap()).unwrap();
        (cfg, m)
    })
}

fn amplitudes() -> impl Strategy<Value = [Complex64; 4]> {
    prop::array::uniform4((0.01f64..1.0, -3.0f64..3.0)).prop_map(|a| a.map(|(r, p)| Complex64::from_polar(r, p)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn type_i_mismatch_even_and_intermodal_mirror(f in -2.0f64..2.0) {
        let (_, m) = model();
        let d = thz_to_omega(f);
        for mode in [ModeId::TE0, ModeId::TE1] {
            let p = SfwmProcess::intramodal(mode);
            prop_assert!((m.phase_mismatch(&p, d).unwrap() - m.phase_mismatch(&p, -d).unwrap()).abs() < 1e-7);
        }
        let a = m.phase_mismatch(&SfwmProcess::intermodal(ModeId::TE0, ModeId::TE1), d).unwrap();
        let b = m.phase_mismatch(&SfwmProcess::intermodal(ModeId::TE1, ModeId::TE0), -d).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn biphoton_states_normalize_and_map_to_valid_density(a in amplitudes()) {
        let s = BiphotonState::normalized(3, a).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let rho = modepair::sfwm::mode_to_polarization(&s, 0.0).unwrap();
        prop_assert!((rho.purity() - 1.0).abs() < 1e-9);
        prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
        for d in s.delta() {
            prop_assert!(d > -std::f64::consts::PI - 1e-12 && d <= std::f64::consts::PI + 1e-12);
        }
    }

    #[test]
    fn wrap_phase_is_periodic(x in -100.0f64..100.0) {
        let w = wrap_phase(x);
        prop_assert!(w > -std::f64::consts::PI - 1e-12 && w <= std::f64::consts::PI + 1e-12);
        let k = (x - w) / (2.0 * std::f64::consts::PI);
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn accidentals_symmetric_under_swap(r in 0.0f64..1e6, ts in 0.001f64..1.0, ti in 0.001f64..1.0, bs in 0.0f64..1e4, bi in 0.0f64..1e4) {
        let det = DetectorModel::default();
        let s = CoincidenceSetup { background_signal_hz: bs, background_idler_hz: bi, ..CoincidenceSetup::default() };
        let swapped = CoincidenceSetup { background_signal_hz: bi, background_idler_hz: bs, ..s };
        let a = expected_counts(r, ts, ti, &s, &det).unwrap();
        let b = expected_counts(r, ti, ts, &swapped, &det).unwrap();
        prop_assert!((a.accidentals - b.accidentals).abs() <= 1e-12 * a.accidentals.max(1.0));
        prop_assert!((a.coincidences_raw - b.coincidences_raw).abs() <= 1e-9 * a.coincidences_raw.max(1.0));
    }

    #[test]
    fn car_decreases_once_pair_dominated(t in 0.01f64..0.1, bg in 0.0f64..2e3) {
        let det = DetectorModel::default();
        let s = CoincidenceSetup { background_signal_hz: bg, background_idler_hz: bg, ..CoincidenceSetup::default() };
        // Pair-generated singles exceed noise by 10x from this rate on.
        let start = 10.0 * (bg + det.dark_rate_hz) / (t * det.efficiency);
        let mut last = f64::INFINITY;
        for i in 0..20 {
            let r = start * 1.3f64.powi(i);
            let c = car(&expected_counts(r, t, t, &s, &det).unwrap()).unwrap();
            prop_assert!(c < last);
            last = c;
        }
    }

    #[test]
    fn sampled_counts_reproducible(r in 1.0f64..1e6, seed in any::<u64>()) {
        let e = expected_counts(r, 0.02, 0.02, &CoincidenceSetup::default(), &DetectorModel::default()).unwrap();
        prop_assert_eq!(sample_counts(&e, seed).unwrap(), sample_counts(&e, seed).unwrap());
    }

    #[test]
    fn heralded_g2_monotone_in_mu(mu in 0.0f64..0.29, ts in 0.01f64..1.0, ti in 0.01f64..1.0) {
        let det = DetectorModel::default();
        let a = heralded_g2(mu, ts, ti, &det).unwrap();
        let b = heralded_g2(mu + 0.01, ts, ti, &det).unwrap();
        prop_assert!(b >= a - 1e-12);
    }

    #[test]
    fn heralded_g2_insensitive_to_signal_loss(mu in 0.0f64..0.03, ts in 0.01f64..1.0, ti in 0.01f64..1.0) {
        let det = DetectorModel::default();
        let a = heralded_g2(mu, 1.0, ti, &det).unwrap();
        let b = heralded_g2(mu, ts, ti, &det).unwrap();
        prop_assert!((a - b).abs() < 1e-3, "{} vs {}", a, b);
    }

    #[test]
    fn mle_returns_physical_state(counts in prop::array::uniform16(0.0f64..500.0), acc in 0.0f64..20.0) {
        prop_assume!(counts.iter().sum::<f64>() > 1.0);
        let d = TomoDataset::from_counts(1.0, counts, [acc; 16]).unwrap();
        for data in [d.clone(), d.net()] {
            if data.total_counts() <= 0.0 {
                continue;
            }
            let rho = mle_reconstruct(&data, &MleOptions::default()).unwrap().rho;
            let tr: f64 = (0..4).map(|i| rho.get(i, i).re).sum();
            prop_assert!((tr - 1.0).abs() < 1e-9);
            prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-9));
            let f = fidelity(&rho, &DensityMatrix::phi_plus()).unwrap();
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f));
        }
    }

    #[test]
    fn mle_invariant_to_count_scale(a in amplitudes(), seed in 0u64..1000, c in 0.1f64..10.0) {
        let rho = modepair::sfwm::mode_to_polarization(&BiphotonState::normalized(1, a).unwrap(), 0.0).unwrap();
        let d = sample_dataset(&born_counts(&rho, 1e3, 5.0).unwrap(), seed).unwrap();
        let opts = MleOptions::default();
        let x = mle_reconstruct(&d, &opts).unwrap().rho;
        let y = mle_reconstruct(&d.scaled(c).unwrap(), &opts).unwrap().rho;
        prop_assert!(x.trace_distance(&y) < 1e-5);
    }

    #[test]
    fn dataset_json_round_trip(counts in prop::array::uniform16(0.0f64..1e6), acc in prop::array::uniform16(0.0f64..1e3), t in 0.1f64..1e4) {
        let d = TomoDataset::from_counts(t, counts, acc).unwrap();
        prop_assert_eq!(TomoDataset::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn config_round_trip(power in 0.1f64..50.0, split in 0.0f64..1.0, phase in -3.0f64..3.0, len in 0.5f64..10.0, seed in any::<u64>()) {
        let mut c = ExperimentConfig::default();
        c.pump.power_mw = power;
        c.pump.split_ratio = split;
        c.pump.relative_phase_rad = phase;
        c.length_mm = len;
        c.seed = seed;
        let back = parse_config_str(&c.to_json()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn number_format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = fmt_num(x);
        prop_assert!(!s.contains(','));
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}

#[test]
fn dispersion_table_round_trip() {
    let (cfg, _) = model();
    let map = cfg.dispersion().unwrap();
    let back = parse_dispersion_table(&dispersion_table_json(&map), &[ModeId::TE0, ModeId::TE1]).unwrap();
    assert_eq!(back, map);
}
