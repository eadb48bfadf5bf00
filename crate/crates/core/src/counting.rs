//! Detected singles, coincidences and accidentals from pair-generation rates;
//! CAR, heralded g²(0) and per-section contribution ratios.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::ModeId;
use crate::units::db_to_linear;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossStage {
    pub name: String,
    pub loss_db: f64,
}

/// Ordered optical losses from generation to the detector input.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LossChain {
    pub stages: Vec<LossStage>,
}

/// Which measurement the photons are routed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// Mode demultiplexer and 1D grating couplers, straight to the DWDM.
    Counting,
    /// 2D grating coupler into the polarization analyzers.
    Tomography,
}

pub const GRATING_1D_DB: f64 = 5.0;
pub const GRATING_2D_DB: f64 = 8.0;
pub const CHIP_EXCESS_TE0_DB: f64 = 5.0;
pub const CHIP_EXCESS_TE1_DB: f64 = 6.0;
pub const MODE_MUX_TE1_DB: f64 = 0.5;
pub const FILTER_DWDM_DB: f64 = 6.0;
pub const TOMOGRAPHY_OPTICS_DB: f64 = 2.12;

impl LossChain {
    pub fn new(stages: Vec<LossStage>) -> Result<Self> {
        let chain = LossChain { stages };
        chain.validate()?;
        Ok(chain)
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(name, loss_db)| LossStage {
                    name: name.to_string(),
                    loss_db,
                })
                .collect(),
        )
    }

    /// Default budget for a photon in `mode`. The detector stage is not part of
    /// the chain; `DetectorModel::efficiency` accounts for it.
    pub fn default_path(mode: ModeId, path: PathKind) -> Self {
        let excess = if mode == ModeId::TE0 {
            CHIP_EXCESS_TE0_DB
        } else {
            CHIP_EXCESS_TE1_DB
        };
        let mut pairs = vec![(
            "grating",
            match path {
                PathKind::Counting => GRATING_1D_DB,
                PathKind::Tomography => GRATING_2D_DB,
            },
        )];
        pairs.push(("chip_excess", excess));
        if mode != ModeId::TE0 {
            pairs.push(("mode_mux", MODE_MUX_TE1_DB));
        }
        pairs.push(("filter_dwdm", FILTER_DWDM_DB));
        if path == PathKind::Tomography {
            pairs.push(("tomography_optics", TOMOGRAPHY_OPTICS_DB));
        }
        Self::from_pairs(&pairs).expect("positive defaults")
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.stages {
            if !(s.loss_db >= 0.0 && s.loss_db.is_finite()) {
                return Err(Error::invalid("loss_db", format!("stage '{}' has loss {} dB", s.name, s.loss_db)));
            }
        }
        Ok(())
    }

    pub fn total_db(&self) -> f64 {
        self.stages.iter().map(|s| s.loss_db).sum()
    }
}

/// Product of the per-stage linear transmissions.
pub fn transmission(chain: &LossChain) -> f64 {
    chain.stages.iter().map(|s| db_to_linear(s.loss_db)).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_rate_hz: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel {
            efficiency: 0.85,
            dark_rate_hz: 100.0,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid("efficiency", "must lie in (0, 1]"));
        }
        if !(self.dark_rate_hz >= 0.0 && self.dark_rate_hz.is_finite()) {
            return Err(Error::invalid("dark_rate_hz", "must be >= 0"));
        }
        Ok(())
    }
}

/// Flat Raman and leakage rate per detector. A calibration value: it sets the
/// absolute CAR but not the trends with pair rate.
pub const DEFAULT_BACKGROUND_HZ: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoincidenceSetup {
    pub window_ns: f64,
    pub integration_time_s: f64,
    /// Raman and pump-leakage photons reaching each detector.
    pub background_signal_hz: f64,
    pub background_idler_hz: f64,
}

impl Default for CoincidenceSetup {
    fn default() -> Self {
        CoincidenceSetup {
            window_ns: 0.8,
            integration_time_s: 10.0,
            background_signal_hz: DEFAULT_BACKGROUND_HZ,
            background_idler_hz: DEFAULT_BACKGROUND_HZ,
        }
    }
}

impl CoincidenceSetup {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_ns > 0.0 && self.window_ns.is_finite()) {
            return Err(Error::invalid("window_ns", "must be > 0"));
        }
        if !(self.integration_time_s > 0.0 && self.integration_time_s.is_finite()) {
            return Err(Error::invalid("integration_time_s", "must be > 0"));
        }
        for (field, v) in [
            ("background_signal_hz", self.background_signal_hz),
            ("background_idler_hz", self.background_idler_hz),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, "must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn window_s(&self) -> f64 {
        self.window_ns * 1e-9
    }
}

/// Counts accumulated over `integration_time_s`; expectation values or samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub singles_signal: f64,
    pub singles_idler: f64,
    pub coincidences_raw: f64,
    pub accidentals: f64,
    pub integration_time_s: f64,
}

impl CountsRecord {
    pub fn coincidences_net(&self) -> f64 {
        self.coincidences_raw - self.accidentals
    }
}

/// Expected counts for pairs generated at `pair_rate_hz` with optical
/// transmissions `t_signal`, `t_idler` (detector efficiency applied on top).
pub fn expected_counts(
    pair_rate_hz: f64,
    t_signal: f64,
    t_idler: f64,
    setup: &CoincidenceSetup,
    detectors: &DetectorModel,
) -> Result<CountsRecord> {
    if !(pair_rate_hz >= 0.0 && pair_rate_hz.is_finite()) {
        return Err(Error::invalid("pair_rate_hz", "must be >= 0"));
    }
    for (field, t) in [("t_signal", t_signal), ("t_idler", t_idler)] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(field, "transmission must lie in [0, 1]"));
        }
    }
    setup.validate()?;
    detectors.validate()?;
    let t = setup.integration_time_s;
    let eta_s = t_signal * detectors.efficiency;
    let eta_i = t_idler * detectors.efficiency;
    let rate_s = pair_rate_hz * eta_s + setup.background_signal_hz + detectors.dark_rate_hz;
    let rate_i = pair_rate_hz * eta_i + setup.background_idler_hz + detectors.dark_rate_hz;
    let true_coinc = pair_rate_hz * eta_s * eta_i * t;
    let accidentals = rate_s * rate_i * setup.window_s() * t;
    Ok(CountsRecord {
        singles_signal: rate_s * t,
        singles_idler: rate_i * t,
        coincidences_raw: true_coinc + accidentals,
        accidentals,
        integration_time_s: t,
    })
}

/// Poisson draw of every field, seeded.
pub fn sample_counts(expected: &CountsRecord, seed: u64) -> Result<CountsRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |mean: f64, field: &'static str| -> Result<f64> {
        if !(mean >= 0.0 && mean.is_finite()) {
            return Err(Error::invalid(field, "expectation must be finite and >= 0"));
        }
        poisson_draw(&mut rng, mean)
    };
    Ok(CountsRecord {
        singles_signal: draw(expected.singles_signal, "singles_signal")?,
        singles_idler: draw(expected.singles_idler, "singles_idler")?,
        coincidences_raw: draw(expected.coincidences_raw, "coincidences_raw")?,
        accidentals: draw(expected.accidentals, "accidentals")?,
        integration_time_s: expected.integration_time_s,
    })
}

pub(crate) fn poisson_draw<R: rand::Rng>(rng: &mut R, mean: f64) -> Result<f64> {
    if mean == 0.0 {
        return Ok(0.0);
    }
    Poisson::new(mean)
        .map(|d| d.sample(rng))
        .map_err(|e| Error::invalid("mean", e.to_string()))
}

/// `(raw − accidentals) / accidentals`
pub fn car(record: &CountsRecord) -> Result<f64> {
    if record.accidentals > 0.0 {
        Ok(record.coincidences_net() / record.accidentals)
    } else {
        Err(Error::UndefinedCar)
    }
}

/// As `car`, but zero accidentals report `+∞` (or NaN for an empty record).
pub fn car_or_infinite(record: &CountsRecord) -> f64 {
    car(record).unwrap_or(if record.coincidences_raw > 0.0 {
        f64::INFINITY
    } else {
        f64::NAN
    })
}

/// Highest pair number kept in the two-mode squeezed vacuum.
pub const FOCK_CUTOFF: usize = 3;

/// Truncated, renormalized thermal pair-number distribution with mean `mu`.
pub fn pair_number_distribution(mu: f64) -> [f64; FOCK_CUTOFF + 1] {
    let mut p = [0.0; FOCK_CUTOFF + 1];
    let r = mu / (1.0 + mu);
    for (n, slot) in p.iter_mut().enumerate() {
        *slot = r.powi(n as i32) / (1.0 + mu);
    }
    let total: f64 = p.iter().sum();
    p.map(|x| x / total)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Probability that a threshold detector of efficiency `eta` fires on `m` photons.
fn click(m: usize, eta: f64) -> f64 {
    1.0 - (1.0 - eta).powi(m as i32)
}

/// Heralded g²(0) of the signal arm behind a 50/50 splitter, heralded by an
/// idler click. Dark counts are left out so the µ → 0 limit is exactly 0.
pub fn heralded_g2(mu: f64, t_signal: f64, t_idler: f64, detectors: &DetectorModel) -> Result<f64> {
    if !(0.0..=0.5).contains(&mu) {
        return Err(Error::invalid("mu", "mean pairs per window must lie in [0, 0.5]"));
    }
    for (field, t) in [("t_signal", t_signal), ("t_idler", t_idler)] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(field, "transmission must lie in [0, 1]"));
        }
    }
    detectors.validate()?;
    if mu == 0.0 {
        return Ok(0.0);
    }
    let eta = detectors.efficiency;
    let pn = pair_number_distribution(mu);
    let (mut h, mut ha, mut hb, mut hab) = (0.0, 0.0, 0.0, 0.0);
    for (n, &p) in pn.iter().enumerate() {
        let herald = p * click(n, t_idler * eta);
        // k signal photons survive the arm, j of them take output A.
        for k in 0..=n {
            let pk = binomial_pmf(n, k, t_signal);
            for j in 0..=k {
                let pj = pk * binomial_pmf(k, j, 0.5);
                let a = click(j, eta);
                let b = click(k - j, eta);
                ha += herald * pj * a;
                hb += herald * pj * b;
                hab += herald * pj * a * b;
            }
        }
        h += herald;
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    Ok(hab * h / (ha * hb))
}

/// Bisection for the µ ∈ (0, 0.5] that yields heralded g² = `target`.
pub fn solve_mu_for_g2(target: f64, t_signal: f64, t_idler: f64, detectors: &DetectorModel) -> Result<f64> {
    let g = |mu| heralded_g2(mu, t_signal, t_idler, detectors);
    let (mut lo, mut hi) = (0.0, 0.5);
    if !(target > 0.0 && target <= g(hi)?) {
        return Err(Error::invalid("g2", format!("target {target} not reachable for mu in (0, 0.5]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One generating waveguide section and the per-photon transmission to the output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub gamma: f64,
    pub length_m: f64,
    pub pump_power_w: f64,
    pub downstream_transmission: f64,
}

/// Detected-pair weights `(γ P L)² t²` normalized to the first section.
pub fn section_contributions(sections: &[Section]) -> Result<Vec<f64>> {
    let weights: Vec<f64> = sections
        .iter()
        .map(|s| (s.gamma * s.pump_power_w * s.length_m).powi(2) * s.downstream_transmission.powi(2))
        .collect();
    let first = *weights
        .first()
        .ok_or_else(|| Error::invalid("sections", "need at least one section"))?;
    if !(first > 0.0 && first.is_finite()) {
        return Err(Error::invalid("sections", "first section has zero weight"));
    }
    Ok(weights.iter().map(|w| w / first).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every photon independently takes one of three fates on the signal side
    /// (A, B, lost) or two on the idler side (detected, lost).
    fn tree_g2(mu: f64, ts: f64, ti: f64, eta: f64) -> f64 {
        let p = pair_number_distribution(mu);
        let fates = [0.5 * ts * eta, 0.5 * ts * eta, 1.0 - ts * eta];
        let idler = [ti * eta, 1.0 - ti * eta];
        let (mut h, mut ha, mut hb, mut hab) = (0.0, 0.0, 0.0, 0.0);
        for (n, &pn) in p.iter().enumerate() {
            for s_path in 0..3usize.pow(n as u32) {
                for i_path in 0..2usize.pow(n as u32) {
                    let (mut prob, mut a, mut b, mut herald) = (pn, false, false, false);
                    let (mut sc, mut ic) = (s_path, i_path);
                    for _ in 0..n {
                        let f = sc % 3;
                        sc /= 3;
                        prob *= fates[f];
                        a |= f == 0;
                        b |= f == 1;
                        let g = ic % 2;
                        ic /= 2;
                        prob *= idler[g];
                        herald |= g == 0;
                    }
                    if herald {
                        h += prob;
                        if a {
                            ha += prob;
                        }
                        if b {
                            hb += prob;
                        }
                        if a && b {
                            hab += prob;
                        }
                    }
                }
            }
        }
        hab * h / (ha * hb)
    }

    #[test]
    fn transmission_examples() {
        assert_eq!(transmission(&LossChain::default()), 1.0);
        let half = LossChain::from_pairs(&[("x", 3.0103)]).unwrap();
        assert!((transmission(&half) - 0.5).abs() < 1e-4);
        let te1 = LossChain::from_pairs(&[
            ("grating", 5.0),
            ("chip_excess", 5.0),
            ("mode_mux", 0.5),
            ("filter_dwdm", 6.0),
            ("tomography_optics", 2.12),
            ("detector", 0.7),
        ])
        .unwrap();
        assert!((transmission(&te1) - 10f64.powf(-1.932)).abs() < 1e-15);
        assert!((transmission(&te1) - 0.0117).abs() < 1e-4);
        assert!(LossChain::from_pairs(&[("bad", -1.0)]).is_err());
    }

    #[test]
    fn default_paths() {
        let c0 = LossChain::default_path(ModeId::TE0, PathKind::Counting);
        assert_eq!(c0.total_db(), 16.0);
        let c1 = LossChain::default_path(ModeId::TE1, PathKind::Counting);
        assert_eq!(c1.total_db(), 17.5);
        let t1 = LossChain::default_path(ModeId::TE1, PathKind::Tomography);
        assert!((t1.total_db() - 22.62).abs() < 1e-12);
    }

    #[test]
    fn dark_only_counts() {
        let setup = CoincidenceSetup {
            background_signal_hz: 0.0,
            background_idler_hz: 0.0,
            ..CoincidenceSetup::default()
        };
        let r = expected_counts(0.0, 0.1, 0.1, &setup, &DetectorModel::default()).unwrap();
        assert_eq!(r.singles_signal, 100.0 * setup.integration_time_s);
        assert_eq!(r.coincidences_net(), 0.0);
    }

    #[test]
    fn pair_dominated_scaling() {
        let setup = CoincidenceSetup {
            background_signal_hz: 0.0,
            background_idler_hz: 0.0,
            ..CoincidenceSetup::default()
        };
        let det = DetectorModel {
            dark_rate_hz: 0.0,
            ..DetectorModel::default()
        };
        let a = expected_counts(1e6, 0.1, 0.2, &setup, &det).unwrap();
        let b = expected_counts(2e6, 0.1, 0.2, &setup, &det).unwrap();
        assert!((b.coincidences_net() / a.coincidences_net() - 2.0).abs() < 1e-12);
        assert!((b.accidentals / a.accidentals - 4.0).abs() < 1e-12);
    }

    #[test]
    fn car_definition() {
        let r = CountsRecord {
            singles_signal: 1.0,
            singles_idler: 1.0,
            coincidences_raw: 20.0,
            accidentals: 10.0,
            integration_time_s: 1.0,
        };
        assert_eq!(car(&r).unwrap(), 1.0);
        let zero = CountsRecord { accidentals: 0.0, ..r };
        assert!(matches!(car(&zero), Err(Error::UndefinedCar)));
        assert_eq!(car_or_infinite(&zero), f64::INFINITY);
    }

    #[test]
    fn sampling_is_seeded() {
        let mean = CountsRecord {
            singles_signal: 1e6,
            singles_idler: 0.0,
            coincidences_raw: 30.0,
            accidentals: 2.5,
            integration_time_s: 1.0,
        };
        let a = sample_counts(&mean, 7).unwrap();
        assert_eq!(a, sample_counts(&mean, 7).unwrap());
        assert_eq!(a.singles_idler, 0.0);
        assert!((a.singles_signal - 1e6).abs() < 5.0 * 1e3);
        let n = 10_000;
        let avg = (0..n).map(|s| sample_counts(&mean, s).unwrap().coincidences_raw).sum::<f64>() / n as f64;
        assert!((avg / 30.0 - 1.0).abs() < 0.01, "{avg}");
    }

    #[test]
    fn g2_matches_probability_tree() {
        for mu in [0.001, 0.01, 0.1, 0.3] {
            for (ts, ti, eta) in [(1.0, 1.0, 1.0), (0.03, 0.02, 0.85), (0.5, 0.9, 0.6)] {
                let det = DetectorModel {
                    efficiency: eta,
                    dark_rate_hz: 0.0,
                };
                let g = heralded_g2(mu, ts, ti, &det).unwrap();
                let oracle = tree_g2(mu, ts, ti, eta);
                assert!((g - oracle).abs() < 1e-12 * oracle.max(1.0), "{mu} {g} {oracle}");
            }
        }
    }

    #[test]
    fn g2_limits_and_range() {
        let det = DetectorModel::default();
        assert_eq!(heralded_g2(0.0, 0.02, 0.02, &det).unwrap(), 0.0);
        assert!(heralded_g2(1e-6, 0.02, 0.02, &det).unwrap() < 1e-4);
        assert!(heralded_g2(0.6, 0.02, 0.02, &det).is_err());
        assert!(heralded_g2(-0.1, 0.02, 0.02, &det).is_err());
    }

    #[test]
    fn mu_solution_reproduces_target() {
        let det = DetectorModel::default();
        let t = transmission(&LossChain::default_path(ModeId::TE0, PathKind::Counting));
        let mu = solve_mu_for_g2(0.13, t, t, &det).unwrap();
        assert!(mu > 0.0 && mu <= 0.1, "{mu}");
        assert!((heralded_g2(mu, t, t, &det).unwrap() - 0.13).abs() < 1e-9);
        assert!(solve_mu_for_g2(5.0, t, t, &det).is_err());
    }

    #[test]
    fn section_law() {
        let mk = |l: f64, t: f64| Section {
            gamma: 100.0,
            length_m: l,
            pump_power_w: 0.007,
            downstream_transmission: t,
        };
        let r = section_contributions(&[mk(0.45e-3, 1.0), mk(3e-3, 1.0), mk(0.25e-3, 1.0)]).unwrap();
        assert!((r[1] - (3.0f64 / 0.45).powi(2)).abs() < 1e-9);
        assert!((r[1] - 44.4).abs() < 0.05 && (r[2] - 0.309).abs() < 1e-3);
        let lossy = section_contributions(&[mk(1e-3, db_to_linear(6.0)), mk(1e-3, 1.0)]).unwrap();
        assert!((lossy[1] - 10f64.powf(1.2)).abs() < 1e-9);
        assert!(section_contributions(&[]).is_err());
        assert!(section_contributions(&[mk(0.0, 1.0), mk(1.0, 1.0)]).is_err());
    }
}
