use crate::config::ExperimentConfig;
use crate::counting::{
    car, expected_counts, solve_mu_for_g2, transmission, CoincidenceSetup, PathKind,
};
use crate::density::{fidelity, DensityMatrix, Operator, BASIS_LABELS};
use crate::dispersion::{dispersion_table_json, DispersionMap};
use crate::error::{Error, Result};
use crate::modes::ModeId;
use crate::seed::derive_seed;
use crate::sfwm::{
    mode_to_polarization, reference_probe_state, BiphotonState, ProcessType, PumpConfig, SfwmModel,
    COMBINATIONS, COMBINATION_LABELS,
};
use crate::tomography::{
    bell_nonlocality_check, born_counts, fit_fringe, mle_reconstruct, monte_carlo_errors, sample_dataset,
    simulate_fringe_scaled, MleOptions, TomoDataset,
};
use crate::units::{omega_to_wavelength_um, SPEED_OF_LIGHT};

use super::csv::{fmt_num, Table};
use super::{Artifact, Metric};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageOutput {
    pub artifacts: Vec<Artifact>,
    pub metrics: Vec<Metric>,
}

impl StageOutput {
    fn file(&mut self, name: impl Into<String>, contents: String) {
        self.artifacts.push(Artifact {
            name: name.into(),
            contents,
        });
    }

    fn metric(&mut self, name: impl Into<String>, value: f64, unit: &'static str, stage: &'static str) {
        self.metrics.push(Metric::new(name, value, unit, stage));
    }
}

pub fn dispersion_stage(config: &ExperimentConfig) -> Result<(DispersionMap, StageOutput)> {
    let series = config.dispersion()?;
    let mut out = StageOutput::default();
    let mut t = Table::new(&[
        "mode",
        "omega0_rad_per_s",
        "wavelength_nm",
        "n_eff",
        "group_index",
        "beta0_rad_per_m",
        "beta1_s_per_m",
        "beta2_ps2_per_m",
    ]);
    for s in series.values() {
        let n_eff = s.beta0 * SPEED_OF_LIGHT / s.omega0;
        t.row(vec![
            s.mode.to_string(),
            fmt_num(s.omega0),
            fmt_num(omega_to_wavelength_um(s.omega0) * 1e3),
            fmt_num(n_eff),
            fmt_num(s.group_index()),
            fmt_num(s.beta0),
            fmt_num(s.beta1),
            fmt_num(s.beta2 * 1e24),
        ]);
        out.metric(format!("n_eff_{}", s.mode), n_eff, "1", "dispersion");
        out.metric(format!("group_index_{}", s.mode), s.group_index(), "1", "dispersion");
        out.metric(format!("beta2_{}", s.mode), s.beta2 * 1e24, "ps^2/m", "dispersion");
    }
    out.file("dispersion.csv", t.render());
    out.file("dispersion_table.json", dispersion_table_json(&series));
    Ok((series, out))
}

pub fn gain_stage(config: &ExperimentConfig, model: &SfwmModel) -> Result<StageOutput> {
    let grid = config.channel_grid();
    let pump = config.pump_config()?;
    let processes = model.processes();
    let spectra = model.gain_spectra(&processes, &grid, &pump, true)?;
    let mut out = StageOutput::default();
    let mut t = Table::new(&[
        "process",
        "type",
        "channel",
        "detuning_thz",
        "phase_mismatch_rad_per_m",
        "gain_normalized",
        "pair_rate_hz",
    ]);
    for spectrum in &spectra {
        let p = spectrum.process;
        for s in &spectrum.samples {
            t.row(vec![
                p.label(),
                p.ptype.to_string(),
                s.channel.to_string(),
                fmt_num(s.detuning_thz),
                fmt_num(model.phase_mismatch(&p, grid.detuning_omega(s.channel))?),
                fmt_num(s.gain),
                fmt_num(model.pair_rate_hz(&p, &grid, s.channel, &pump)?),
            ]);
        }
        let within: Vec<f64> = spectrum
            .samples
            .iter()
            .filter(|s| s.detuning_thz.abs() <= 2.0 + 1e-9)
            .map(|s| s.gain)
            .collect();
        let max = within.iter().cloned().fold(0.0, f64::max);
        let min = within.iter().cloned().fold(f64::INFINITY, f64::min);
        match p.ptype {
            ProcessType::I => out.metric(format!("gain_max_over_min_{}", p.label()), max / min, "1", "gain"),
            ProcessType::III => {
                let near = spectrum.at_channel(1).unwrap_or(f64::NAN);
                let far_k = (2.0 / grid.spacing_thz()).round() as i32;
                if let Some(far) = spectrum.at_channel(far_k) {
                    out.metric(format!("gain_2thz_over_near_{}", p.label()), far / near, "1", "gain");
                }
            }
            ProcessType::II => {}
        }
    }
    out.file("gain.csv", t.render());
    Ok(out)
}

fn state_table(state: &BiphotonState) -> Table {
    let mut t = Table::new(&[
        "combination",
        "polarization",
        "amplitude_re",
        "amplitude_im",
        "modulus",
        "phase_rad",
        "eta",
        "delta_rad",
    ]);
    let eta = state.eta();
    let delta = state.delta();
    for j in 0..4 {
        let a = state.amplitudes[j];
        let (e, d) = if j == 0 { (1.0, 0.0) } else { (eta[j - 1], delta[j - 1]) };
        t.row(vec![
            COMBINATION_LABELS[j].to_string(),
            BASIS_LABELS[j].to_string(),
            fmt_num(a.re),
            fmt_num(a.im),
            fmt_num(a.norm()),
            fmt_num(a.arg()),
            fmt_num(e),
            fmt_num(d),
        ]);
    }
    t
}

pub fn state_stage(config: &ExperimentConfig, model: &SfwmModel, channels: &[u32]) -> Result<StageOutput> {
    let grid = config.channel_grid();
    let pump = config.pump_config()?;
    let mut out = StageOutput::default();
    for &k in channels {
        let s = model.biphoton_state(&grid, k, &pump, config.phase_model)?;
        out.file(format!("state_ch{k:02}.csv"), state_table(&s).render());
    }
    Ok(out)
}

/// Pair rate into each signal/idler combination at channel `k`, summed over
/// the processes that produce it.
fn combination_rates(model: &SfwmModel, config: &ExperimentConfig, k: u32, pump: &PumpConfig) -> Result<[f64; 4]> {
    let grid = config.channel_grid();
    let mut rates = [0.0; 4];
    for p in model.processes() {
        if let Some(j) = COMBINATIONS.iter().position(|&(s, i)| s == p.signal && i == p.idler) {
            rates[j] += model.pair_rate_hz(&p, &grid, k as i32, pump)?;
        }
    }
    Ok(rates)
}

pub fn counts_stage(config: &ExperimentConfig, model: &SfwmModel) -> Result<StageOutput> {
    let pump = config.pump_config()?;
    let det = config.detector;
    let t_of = |m: ModeId| transmission(config.losses.chain(m, PathKind::Counting));
    let mut out = StageOutput::default();
    let mut tables: Vec<Table> = (0..4)
        .map(|_| {
            Table::new(&[
                "channel",
                "pair_rate_hz",
                "singles_signal_counts",
                "singles_idler_counts",
                "raw_coincidences_counts",
                "accidentals_counts",
                "car_raw",
                "car_net",
            ])
        })
        .collect();
    let mut type_iii_car_max: f64 = 0.0;
    for k in 1..=config.grid.max_channel {
        let rates = combination_rates(model, config, k, &pump)?;
        for (j, &(s, i)) in COMBINATIONS.iter().enumerate() {
            // Photons of the other combinations reach the same mode-resolved detectors.
            let mut setup: CoincidenceSetup = config.coincidence;
            for (o, &(so, io)) in COMBINATIONS.iter().enumerate() {
                if o == j {
                    continue;
                }
                if so == s {
                    setup.background_signal_hz += rates[o] * t_of(s) * det.efficiency;
                }
                if io == i {
                    setup.background_idler_hz += rates[o] * t_of(i) * det.efficiency;
                }
            }
            let rec = expected_counts(rates[j], t_of(s), t_of(i), &setup, &det)?;
            let car_net = car(&rec)?;
            let car_raw = rec.coincidences_raw / rec.accidentals;
            tables[j].row(vec![
                k.to_string(),
                fmt_num(rates[j]),
                fmt_num(rec.singles_signal),
                fmt_num(rec.singles_idler),
                fmt_num(rec.coincidences_raw),
                fmt_num(rec.accidentals),
                fmt_num(car_raw),
                fmt_num(car_net),
            ]);
            if s != i {
                type_iii_car_max = type_iii_car_max.max(car_net);
            }
            if k == config.tomography.preferred_bell_channel {
                out.metric(format!("pair_rate_{}_ch{k}", COMBINATION_LABELS[j]), rates[j], "Hz", "counts");
                out.metric(format!("car_{}_ch{k}", COMBINATION_LABELS[j]), car_net, "1", "counts");
            }
        }
    }
    out.metric("car_type_iii_max", type_iii_car_max, "1", "counts");
    for (j, t) in tables.into_iter().enumerate() {
        out.file(format!("counts_{}.csv", COMBINATION_LABELS[j]), t.render());
    }
    let t0 = t_of(ModeId::TE0);
    let mu = solve_mu_for_g2(config.g2.target, t0, t0, &det)?;
    out.metric("g2_target", config.g2.target, "1", "counts");
    out.metric("g2_mean_pairs_per_window", mu, "1", "counts");
    Ok(out)
}

/// Device state and calibration used for the Bell-channel measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct BellExperiment {
    pub channel: u32,
    pub pump: PumpConfig,
    pub state: BiphotonState,
    /// Polarization state emitted by the source.
    pub rho_source: DensityMatrix,
    /// Signal analyzer rotation reproducing the configured net fidelity.
    pub misalignment_rad: f64,
    /// State as seen through the misset analyzers.
    pub rho_measured: DensityMatrix,
    /// Accidental coincidences per setting reproducing the configured raw fidelity.
    pub accidental_floor: f64,
    pub counts_per_basis: f64,
}

/// Configured channel, or the channel nearest the preferred one whose Bell
/// operating point keeps intermodal pairs negligible.
pub fn select_bell_channel(config: &ExperimentConfig, model: &SfwmModel) -> Result<u32> {
    let t = &config.tomography;
    let grid = config.channel_grid();
    if let Some(k) = t.bell_channel {
        model.bell_operating_point(&grid, k, config.pump.power_mw, config.phase_model, t.negligible_ratio)?;
        return Ok(k);
    }
    match model
        .bell_channels(&grid, t.preferred_bell_channel, config.pump.power_mw, config.phase_model, t.negligible_ratio)
        .first()
    {
        Some(&k) => Ok(k),
        None => Err(model
            .bell_operating_point(
                &grid,
                t.preferred_bell_channel,
                config.pump.power_mw,
                config.phase_model,
                t.negligible_ratio,
            )
            .err()
            .unwrap_or(Error::EmptyState)),
    }
}

pub fn bell_state_at(config: &ExperimentConfig, model: &SfwmModel, k: u32) -> Result<(PumpConfig, BiphotonState)> {
    let grid = config.channel_grid();
    let t = &config.tomography;
    let pump = model.bell_operating_point(&grid, k, config.pump.power_mw, config.phase_model, t.negligible_ratio)?;
    let state = model.intramodal_state(&grid, k, &pump, config.phase_model, t.negligible_ratio)?;
    Ok((pump, state))
}

pub fn bell_experiment(config: &ExperimentConfig, model: &SfwmModel) -> Result<BellExperiment> {
    let t = &config.tomography;
    let channel = select_bell_channel(config, model)?;
    let (pump, state) = bell_state_at(config, model, channel)?;
    let rho_source = mode_to_polarization(&state, 0.0)?;
    let misalignment_rad = t.net_fidelity_target.sqrt().acos();
    let rho_measured = rho_source.rotate_signal(misalignment_rad);
    let f_measured = fidelity(&rho_measured, &DensityMatrix::phi_plus())?;
    // Counts n p + a correspond to (n ρ + a I)/(n + 4a), so the raw fidelity
    // is (n F + a)/(n + 4a).
    let f_raw = t.raw_fidelity_target;
    let accidental_floor = (t.counts_per_basis * (f_measured - f_raw) / (4.0 * f_raw - 1.0)).max(0.0);
    Ok(BellExperiment {
        channel,
        pump,
        state,
        rho_source,
        misalignment_rad,
        rho_measured,
        accidental_floor,
        counts_per_basis: t.counts_per_basis,
    })
}

fn rho_table(rho: &Operator) -> Table {
    let mut header = vec!["row".to_string()];
    for part in ["re", "im"] {
        for l in BASIS_LABELS {
            header.push(format!("{l}_{part}"));
        }
    }
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs);
    for (r, label) in BASIS_LABELS.iter().enumerate() {
        let mut cells = vec![label.to_string()];
        cells.extend((0..4).map(|c| fmt_num(rho[(r, c)].re)));
        cells.extend((0..4).map(|c| fmt_num(rho[(r, c)].im)));
        t.row(cells);
    }
    t
}

pub fn tomography_stage(
    config: &ExperimentConfig,
    model: &SfwmModel,
    bell: &BellExperiment,
    seed: u64,
) -> Result<StageOutput> {
    let t = &config.tomography;
    let opts = t.mle_options();
    let ideal = DensityMatrix::phi_plus();
    let n = t.counts_per_basis;
    let mut out = StageOutput::default();
    out.metric("bell_channel", bell.channel as f64, "channel", "tomography");
    out.metric("bell_split_ratio", bell.pump.split_ratio, "1", "tomography");
    out.metric("bell_relative_phase", bell.pump.relative_phase_rad, "rad", "tomography");
    out.metric("bell_source_fidelity", fidelity(&bell.rho_source, &ideal)?, "1", "tomography");
    out.metric("analyzer_misalignment", bell.misalignment_rad.to_degrees(), "deg", "tomography");
    out.metric("accidental_floor", bell.accidental_floor, "counts", "tomography");
    out.file("rho_bell_source.csv", rho_table(bell.rho_source.matrix()).render());

    // Source state straight into the analyzers: the reconstruction round trip.
    let trip = sample_dataset(&born_counts(&bell.rho_source, n, 0.0)?, derive_seed(seed, "bell_round_trip", 0))?;
    let trip_rho = mle_reconstruct(&trip, &opts)?.rho;
    out.metric("bell_round_trip_fidelity", fidelity(&trip_rho, &bell.rho_source)?, "1", "tomography");

    // Misset analyzers and accidentals: raw and net reconstructions.
    let data = sample_dataset(
        &born_counts(&bell.rho_measured, n, bell.accidental_floor)?,
        derive_seed(seed, "bell_measurement", 0),
    )?;
    out.file("tomo_bell_dataset.json", data.to_json());
    for (kind, d) in [("raw", data.clone()), ("net", data.net())] {
        let res = mle_reconstruct(&d, &opts)?;
        let mc = monte_carlo_errors(
            &d,
            t.monte_carlo_resamples,
            derive_seed(seed, "bell_monte_carlo", (kind == "net") as u64),
            &ideal,
            &opts,
        )?;
        out.metric(format!("bell_{kind}_fidelity"), fidelity(&res.rho, &ideal)?, "1", "tomography");
        out.metric(format!("bell_{kind}_fidelity_std"), mc.fidelity_std, "1", "tomography");
        out.metric(format!("bell_{kind}_purity"), res.rho.purity(), "1", "tomography");
        out.metric(format!("bell_{kind}_concurrence"), res.rho.concurrence(), "1", "tomography");
        out.file(format!("rho_bell_{kind}.csv"), rho_table(res.rho.matrix()).render());
    }

    // Four-term state near the pump, from the model and from the reference fit.
    let grid = config.channel_grid();
    let probe = model.biphoton_state(&grid, t.probe_channel, &config.pump_config()?, config.phase_model)?;
    for (name, state, index) in [("probe", probe, 0u64), ("reference_probe", reference_probe_state(), 1)] {
        let rho = mode_to_polarization(&state, 0.0)?;
        let d = sample_dataset(&born_counts(&rho, n, 0.0)?, derive_seed(seed, "probe_measurement", index))?;
        let res = mle_reconstruct(&d, &opts)?;
        let mc = monte_carlo_errors(&d, t.monte_carlo_resamples, derive_seed(seed, "probe_monte_carlo", index), &rho, &opts)?;
        out.metric(format!("{name}_fidelity"), fidelity(&res.rho, &rho)?, "1", "tomography");
        out.metric(format!("{name}_fidelity_std"), mc.fidelity_std, "1", "tomography");
        out.file(format!("rho_{name}_model.csv"), rho_table(rho.matrix()).render());
        out.file(format!("rho_{name}_reconstructed.csv"), rho_table(res.rho.matrix()).render());
    }
    Ok(out)
}

/// What a reconstructed dataset is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum ReconstructTarget {
    Bell,
    ReferenceProbe,
    State(Box<DensityMatrix>),
}

impl ReconstructTarget {
    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            ReconstructTarget::Bell => Ok(DensityMatrix::phi_plus()),
            ReconstructTarget::ReferenceProbe => mode_to_polarization(&reference_probe_state(), 0.0),
            ReconstructTarget::State(rho) => Ok((**rho).clone()),
        }
    }
}

/// Raw and accidental-subtracted reconstructions of one dataset.
pub fn reconstruct_stage(
    dataset: &TomoDataset,
    target: &ReconstructTarget,
    options: &MleOptions,
    resamples: usize,
    seed: u64,
) -> Result<StageOutput> {
    let target = target.density()?;
    let mut out = StageOutput::default();
    for (kind, d) in [("raw", dataset.clone()), ("net", dataset.net())] {
        let res = mle_reconstruct(&d, options)?;
        let mc = monte_carlo_errors(&d, resamples, derive_seed(seed, "reconstruct_monte_carlo", (kind == "net") as u64), &target, options)?;
        out.metric(format!("{kind}_fidelity"), fidelity(&res.rho, &target)?, "1", "tomography");
        out.metric(format!("{kind}_fidelity_mc_mean"), mc.fidelity_mean, "1", "tomography");
        out.metric(format!("{kind}_fidelity_std"), mc.fidelity_std, "1", "tomography");
        out.metric(format!("{kind}_purity"), res.rho.purity(), "1", "tomography");
        out.metric(format!("{kind}_neg_log_likelihood"), res.neg_log_likelihood, "1", "tomography");
        out.metric(format!("{kind}_iterations"), res.iterations as f64, "1", "tomography");
        out.metric(format!("{kind}_converged"), res.converged as u8 as f64, "1", "tomography");
        out.file(format!("rho_{kind}.csv"), rho_table(res.rho.matrix()).render());
        let mut std = Table::new(&["row", "HH_re_std", "HV_re_std", "VH_re_std", "VV_re_std", "HH_im_std", "HV_im_std", "VH_im_std", "VV_im_std"]);
        for (r, label) in BASIS_LABELS.iter().enumerate() {
            let mut cells = vec![label.to_string()];
            cells.extend((0..4).map(|c| fmt_num(mc.rho_std_re[(r, c)])));
            cells.extend((0..4).map(|c| fmt_num(mc.rho_std_im[(r, c)])));
            std.row(cells);
        }
        out.file(format!("rho_{kind}_std.csv"), std.render());
    }
    Ok(out)
}

pub fn fringe_stage(config: &ExperimentConfig, bell: &BellExperiment) -> Result<StageOutput> {
    let t = &config.tomography;
    let steps = (t.fringe_span_deg / t.fringe_step_deg).floor() as usize;
    let angles: Vec<f64> = (0..=steps).map(|i| i as f64 * t.fringe_step_deg).collect();
    let mut out = StageOutput::default();
    let mut samples = Table::new(&[
        "theta_signal_deg",
        "scan_angle_deg",
        "coincidences_counts",
        "net_coincidences_counts",
        "fit_raw_counts",
    ]);
    let mut fits = Table::new(&[
        "theta_signal_deg",
        "kind",
        "visibility",
        "phase_deg",
        "period_deg",
        "baseline_counts",
        "degenerate",
        "bell_nonlocal",
    ]);
    for theta_s in [0.0, 45.0] {
        let scan = simulate_fringe_scaled(
            &bell.rho_measured,
            theta_s,
            &angles,
            bell.counts_per_basis,
            bell.accidental_floor,
            t.angle_scale,
        );
        let raw = fit_fringe(&scan)?;
        let net = fit_fringe(&scan.net())?;
        for (i, &a) in angles.iter().enumerate() {
            samples.row(vec![
                fmt_num(theta_s),
                fmt_num(a),
                fmt_num(scan.counts[i]),
                fmt_num(scan.counts[i] - scan.accidentals),
                fmt_num(raw.model(a)),
            ]);
        }
        for (kind, fit) in [("raw", raw), ("net", net)] {
            let nonlocal = bell_nonlocality_check(fit.visibility.min(1.05))?;
            fits.row(vec![
                fmt_num(theta_s),
                kind.to_string(),
                fmt_num(fit.visibility),
                fmt_num(fit.phase_deg),
                fmt_num(fit.period_deg),
                fmt_num(fit.baseline),
                fit.degenerate.to_string(),
                nonlocal.to_string(),
            ]);
            out.metric(format!("fringe_visibility_{kind}_{}deg", theta_s as u32), fit.visibility, "1", "fringe");
        }
    }
    out.file("fringes.csv", samples.render());
    out.file("fringe_fits.csv", fits.render());
    Ok(out)
}
