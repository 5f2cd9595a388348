//! Experiment harness for `qhlab-core`: configuration, pipelines, reports
//! and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod experiments;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{validate, ConfigIssue, Experiment, ExperimentConfig, Validation};
pub use experiments::{ExperimentOutput, StageTiming, Stages};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "LAB_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    ConfigInvalid(Vec<ConfigIssue>),
    #[error(transparent)]
    Domain(#[from] qhlab_core::domain::DomainError),
    #[error(transparent)]
    Elliptic(#[from] qhlab_core::elliptic::EllipticError),
    #[error(transparent)]
    Green(#[from] qhlab_core::green::GreenError),
    #[error(transparent)]
    Metric(#[from] qhlab_core::metric::MetricError),
    #[error(transparent)]
    Potential(#[from] qhlab_core::potential::PotentialError),
    #[error(transparent)]
    Io(#[from] qhlab_core::io::IoError),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("experiment `{experiment}` failed: {source}")]
    Stage {
        experiment: &'static str,
        #[source]
        source: Box<RunError>,
    },
}

/// One file written by a run.
#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub qhlab: &'static str,
    pub qhlab_core: &'static str,
}

/// Written last as `manifest.json`; its presence marks a complete run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub versions: Versions,
    pub stages: Stages,
    pub outputs: Vec<OutputFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

/// Result of [`run`]: where the files went and what they contain.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub manifest: RunManifest,
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::File {
        path: path.to_path_buf(),
        source,
    }
}

/// Write `bytes` to `dir/name` through a temporary file and a rename, so the
/// target is either absent or complete.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<OutputFile, RunError> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(file_err(dir))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(file_err(&target))?;
    tmp.persist(&target).map_err(|e| RunError::File {
        path: target.clone(),
        source: e.error,
    })?;
    Ok(OutputFile {
        file: name.to_string(),
        bytes: bytes.len(),
        sha256: hex::encode(Sha256::digest(bytes)),
    })
}

fn csv_bytes(table: &experiments::Table) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| RunError::Io(qhlab_core::io::IoError::Csv(e));
    w.write_record(&table.header).map_err(to_io)?;
    for row in &table.rows {
        w.write_record(row).map_err(to_io)?;
    }
    w.into_inner().map_err(|e| RunError::File {
        path: PathBuf::from("probes.csv"),
        source: e.into_error(),
    })
}

/// Output directory after applying the environment override.
pub fn resolve_output_dir(config: &ExperimentConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| config.output_dir.clone())
}

/// Validate, execute and write every artifact of one experiment.
///
/// `report.json`, `probes.csv` and the heatmaps are written first; the
/// manifest with their hashes is written last.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    run_in(config, &resolve_output_dir(config))
}

/// [`run`] with an explicit output directory.
pub fn run_in(config: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let (errors, warnings) = config::check(config);
    if !errors.is_empty() {
        return Err(RunError::ConfigInvalid(errors));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    std::fs::create_dir_all(dir).map_err(file_err(dir))?;
    let mut stages = Stages::default();
    let out = experiments::execute(config, &mut stages).map_err(|e| RunError::Stage {
        experiment: config.experiment.name(),
        source: Box::new(e),
    })?;

    let outputs = stages.time("write", || -> Result<Vec<OutputFile>, RunError> {
        let mut files = Vec::new();
        let report = serde_json::to_vec_pretty(&out.report).expect("reports serialize to JSON");
        files.push(write_atomic(dir, "report.json", &report)?);
        files.push(write_atomic(dir, "probes.csv", &csv_bytes(&out.table)?)?);
        for (stem, map) in &out.heatmaps {
            let mut pgm = Vec::new();
            map.write_pgm(&mut pgm).map_err(file_err(dir))?;
            files.push(write_atomic(dir, &format!("{stem}.pgm"), &pgm)?);
            let side = serde_json::to_vec_pretty(&map.sidecar).expect("sidecars serialize to JSON");
            files.push(write_atomic(dir, &format!("{stem}.sidecar.json"), &side)?);
        }
        Ok(files)
    })?;

    let manifest = RunManifest {
        config: config.clone(),
        versions: Versions {
            qhlab: env!("CARGO_PKG_VERSION"),
            qhlab_core: qhlab_core::VERSION,
        },
        stages,
        outputs,
        passed: out.passed,
    };
    let bytes = serde_json::to_vec_pretty(&manifest).expect("manifests serialize to JSON");
    write_atomic(dir, "manifest.json", &bytes)?;
    Ok(RunOutcome {
        output_dir: dir.to_path_buf(),
        manifest,
    })
}
