use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use modepair::config::{parse_config, ExperimentConfig};
use modepair::error::Result;
use modepair::report::{
    bell_experiment, counts_stage, dispersion_stage, fringe_stage, gain_stage, in_stage, metrics_table,
    reconstruct_stage, run_report, state_stage, write_artifacts, Artifact, ReconstructTarget, StageOutput,
};
use modepair::seed::derive_seed;
use modepair::sfwm::{mode_to_polarization, reference_probe_state};
use modepair::tomography::{born_counts, sample_dataset, TomoDataset};

#[derive(Parser)]
#[command(name = "modepair", version, about = "Transverse-mode entangled photon-pair simulator")]
struct Cli {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Effective-index dispersion of TE0 and TE1.
    Dispersion,
    /// Gain spectra of every SFWM process.
    Gain,
    /// Four-term biphoton state per channel.
    State {
        #[arg(long)]
        channel: Option<u32>,
    },
    /// Singles, coincidences, accidentals and CAR per channel.
    Counts,
    /// Two-qubit state tomography.
    #[command(subcommand)]
    Tomo(Tomo),
    /// Polarization-correlation fringes at the Bell channel.
    Fringe,
    /// Every stage plus a metrics summary.
    Report,
}

#[derive(Subcommand)]
enum Tomo {
    /// Simulates a 16-setting dataset.
    Simulate(SimulateArgs),
    /// Maximum-likelihood reconstruction of a dataset.
    Reconstruct {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = TargetArg::Bell)]
        target: TargetArg,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Four-term state at this channel under the configured pump instead of the Bell point.
    #[arg(long, conflicts_with = "reference_probe")]
    channel: Option<u32>,
    /// Reference four-term state instead of a model state.
    #[arg(long)]
    reference_probe: bool,
    /// Expected counts without Poisson noise.
    #[arg(long)]
    noiseless: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Bell,
    ReferenceProbe,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(p) => parse_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    Ok(config)
}

fn simulate(config: &ExperimentConfig, args: &SimulateArgs) -> Result<StageOutput> {
    let (series, _) = dispersion_stage(config)?;
    let model = config.sfwm_model(series)?;
    let n = config.tomography.counts_per_basis;
    let (rho, floor) = if args.reference_probe {
        (mode_to_polarization(&reference_probe_state(), 0.0)?, 0.0)
    } else if let Some(k) = args.channel {
        let state = model.biphoton_state(&config.channel_grid(), k, &config.pump_config()?, config.phase_model)?;
        (mode_to_polarization(&state, 0.0)?, 0.0)
    } else {
        let bell = bell_experiment(config, &model)?;
        (bell.rho_measured, bell.accidental_floor)
    };
    let expected = born_counts(&rho, n, floor)?;
    let data: TomoDataset = if args.noiseless {
        expected
    } else {
        sample_dataset(&expected, derive_seed(config.seed, "tomo_simulate", 0))?
    };
    Ok(StageOutput {
        artifacts: vec![Artifact {
            name: "tomo_dataset.json".into(),
            contents: data.to_json(),
        }],
        metrics: Vec::new(),
    })
}

fn execute(cli: &Cli) -> Result<()> {
    let config = load(cli)?;
    let stage = |name: &'static str, r: Result<StageOutput>| in_stage(name, &config, r);
    let out = match &cli.command {
        Command::Report => {
            let bundle = run_report(&config)?;
            write_artifacts(&cli.out, &bundle.artifacts)?;
            return Ok(());
        }
        Command::Dispersion => stage("dispersion", dispersion_stage(&config).map(|(_, o)| o))?,
        Command::Gain => stage(
            "gain",
            dispersion_stage(&config).and_then(|(s, _)| gain_stage(&config, &config.sfwm_model(s)?)),
        )?,
        Command::State { channel } => {
            let channels: Vec<u32> = match channel {
                Some(k) => vec![*k],
                None => (1..=config.grid.max_channel).collect(),
            };
            stage(
                "state",
                dispersion_stage(&config).and_then(|(s, _)| state_stage(&config, &config.sfwm_model(s)?, &channels)),
            )?
        }
        Command::Counts => stage(
            "counts",
            dispersion_stage(&config).and_then(|(s, _)| counts_stage(&config, &config.sfwm_model(s)?)),
        )?,
        Command::Fringe => stage(
            "fringe",
            dispersion_stage(&config).and_then(|(s, _)| {
                let bell = bell_experiment(&config, &config.sfwm_model(s)?)?;
                fringe_stage(&config, &bell)
            }),
        )?,
        Command::Tomo(Tomo::Simulate(args)) => stage("tomography", simulate(&config, args))?,
        Command::Tomo(Tomo::Reconstruct { dataset, target }) => {
            let data = TomoDataset::load(dataset)?;
            let target = match target {
                TargetArg::Bell => ReconstructTarget::Bell,
                TargetArg::ReferenceProbe => ReconstructTarget::ReferenceProbe,
            };
            let t = &config.tomography;
            stage(
                "tomography",
                reconstruct_stage(&data, &target, &t.mle_options(), t.monte_carlo_resamples, config.seed),
            )?
        }
    };
    let hash = config.hash();
    let mut artifacts = out.artifacts;
    artifacts.push(Artifact {
        name: "config.json".into(),
        contents: config.to_json(),
    });
    artifacts.push(Artifact {
        name: "metrics.csv".into(),
        contents: metrics_table(&out.metrics, &hash, config.seed).render(),
    });
    write_artifacts(&cli.out, &artifacts)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
