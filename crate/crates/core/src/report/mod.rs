//! End-to-end pipeline and its CSV/JSON bundle.

mod csv;
mod stages;

use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

pub use csv::{fmt_num, Table};
pub use stages::{
    bell_experiment, bell_state_at, counts_stage, dispersion_stage, fringe_stage, gain_stage,
    reconstruct_stage, select_bell_channel, state_stage, tomography_stage, BellExperiment, ReconstructTarget,
    StageOutput,
};

/// One named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// One row of the metrics summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub unit: &'static str,
    pub stage: &'static str,
}

impl Metric {
    pub fn new(name: impl Into<String>, value: f64, unit: &'static str, stage: &'static str) -> Self {
        Metric {
            name: name.into(),
            value,
            unit,
            stage,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub artifacts: Vec<Artifact>,
    pub metrics: Vec<Metric>,
    pub config_hash: String,
    pub seed: u64,
}

impl ReportBundle {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }
}

/// `metric,value,unit,stage,config_hash,seed` rows.
pub fn metrics_table(metrics: &[Metric], config_hash: &str, seed: u64) -> Table {
    let mut t = Table::new(&["metric", "value", "unit", "stage", "config_hash", "seed"]);
    for m in metrics {
        t.row(vec![
            m.name.clone(),
            fmt_num(m.value),
            m.unit.to_string(),
            m.stage.to_string(),
            config_hash.to_string(),
            seed.to_string(),
        ]);
    }
    t
}

/// Wraps a stage failure with the stage name and the config hash.
pub fn in_stage<T>(stage: &'static str, config: &ExperimentConfig, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage,
        input_hash: config.hash(),
        source: Box::new(e),
    })
}

/// Dispersion, gain spectra, per-channel states, counts and CAR, Bell-channel
/// and probe-channel tomography, and fringe fits, all from one config.
pub fn run_report(config: &ExperimentConfig) -> Result<ReportBundle> {
    let seed = config.seed;
    let mut artifacts = vec![Artifact {
        name: "config.json".into(),
        contents: config.to_json(),
    }];
    let mut metrics = Vec::new();
    let mut absorb = |out: StageOutput| {
        artifacts.extend(out.artifacts);
        metrics.extend(out.metrics);
    };

    let (series, out) = in_stage("dispersion", config, dispersion_stage(config))?;
    absorb(out);
    let model = in_stage("gain", config, config.sfwm_model(series))?;
    absorb(in_stage("gain", config, gain_stage(config, &model))?);
    let channels: Vec<u32> = (1..=config.grid.max_channel).collect();
    absorb(in_stage("state", config, state_stage(config, &model, &channels))?);
    absorb(in_stage("counts", config, counts_stage(config, &model))?);
    let bell = in_stage("tomography", config, bell_experiment(config, &model))?;
    absorb(in_stage("tomography", config, tomography_stage(config, &model, &bell, seed))?);
    absorb(in_stage("fringe", config, fringe_stage(config, &bell))?);

    let hash = config.hash();
    artifacts.push(Artifact {
        name: "metrics.csv".into(),
        contents: metrics_table(&metrics, &hash, seed).render(),
    });
    Ok(ReportBundle {
        artifacts,
        metrics,
        config_hash: hash,
        seed,
    })
}

/// Writes each artifact to a temporary sibling and renames it into place.
pub fn write_artifacts(dir: impl AsRef<Path>, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let tmp = path.with_file_name(format!(".{}.tmp", path.file_name().unwrap().to_string_lossy()));
        std::fs::write(&tmp, a.contents.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
