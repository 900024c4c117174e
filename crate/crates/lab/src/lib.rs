//! Experiment runner for `extrapolab-core`: configuration files, the
//! verification suites, CSV reports and grid-function files.

// `!(x > 0.0)` guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};

pub mod config;
pub mod io;
pub mod report;
pub mod suites;

pub use config::{ConfigError, ExperimentConfig, SuiteName};
pub use report::{ReportRecord, Summary};
pub use suites::{run, SuiteOutput};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] extrapolab_core::Error),
    #[error(transparent)]
    File(#[from] io::IoError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Fs { path: String, source: std::io::Error },
}

impl LabError {
    pub(crate) fn fs(path: &Path, source: std::io::Error) -> Self {
        LabError::Fs { path: path.display().to_string(), source }
    }
}

/// Writes `<dir>/<suite>.csv` and `<dir>/<suite>.summary.json`.
pub fn write_outputs(dir: &Path, out: &SuiteOutput) -> Result<(PathBuf, PathBuf), LabError> {
    fs::create_dir_all(dir).map_err(|e| LabError::fs(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", out.suite));
    let file = fs::File::create(&csv_path).map_err(|e| LabError::fs(&csv_path, e))?;
    report::write_csv(std::io::BufWriter::new(file), &out.records)?;
    let json_path = dir.join(format!("{}.summary.json", out.suite));
    let text = serde_json::to_string_pretty(&out.summary)?;
    fs::write(&json_path, text + "\n").map_err(|e| LabError::fs(&json_path, e))?;
    Ok((csv_path, json_path))
}
