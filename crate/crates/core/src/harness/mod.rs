//! Batch front end: configured runs, ratio sweeps, model calibration,
//! prediction reports and verification suites, all emitting CSV.

pub mod config;
pub mod predict;
pub mod runner;
pub mod verify;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::decomp::DecompError;
use crate::metrics::MetricsError;
use crate::perf_model::PerfError;
use crate::SolverError;

pub use config::{CaseConfig, ConfigError, OUT_DIR_ENV};
pub use predict::{predict_files, predict_report, PredictReport, PredictRow};
pub use runner::{
    calibrate, calibrate_slowdowns, execute, run, sweep, write_solution, RunArtifacts, Slowdowns, SweepReport, SweepRow,
};
pub use verify::{verify, Suite, VerifyOutcome};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Perf(#[from] PerfError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn create(dir: &Path, name: &str) -> Result<(PathBuf, std::io::BufWriter<std::fs::File>), HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    let f = std::fs::File::create(&path).map_err(io_err(&path))?;
    Ok((path, std::io::BufWriter::new(f)))
}

pub(crate) fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, HarnessError> {
    let f = std::fs::File::open(path).map_err(io_err(path))?;
    Ok(std::io::BufReader::new(f))
}
