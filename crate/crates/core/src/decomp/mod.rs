//! Weighted slab decomposition along `i` and the synchronised heterogeneous
//! worker pool that marches it.

pub mod barrier;
pub mod clock;
pub mod exchange;
pub mod exec;
pub mod partition;
pub mod slowdown;
pub mod timing;

use thiserror::Error;

use crate::error::SolverError;
use crate::numerics::Edge;
pub use exec::{run_heterogeneous, ExecSettings, HeteroRun};
pub use partition::{partition_weighted, Partition, Slab, WorkerClass, WorkerSpec};
pub use slowdown::{calibrate_slowdown, SlowdownCalibration};
pub use timing::{Stage, StageRecord, StageTimings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompError {
    #[error("invalid worker specification: {0}")]
    InvalidSpec(String),
    #[error("{n_l} columns cannot give each of {workers} workers at least one column")]
    TooFewColumns { n_l: usize, workers: usize },
    #[error("worker {worker} waited past the timeout for ghost data on its {edge:?} edge")]
    Deadlock { worker: usize, edge: Edge },
    #[error("worker {worker} timed out at a {stage} barrier")]
    BarrierTimeout { worker: usize, stage: Stage },
    #[error("worker {worker} panicked during the {stage} stage: {message}")]
    WorkerPanic { worker: usize, stage: Stage, message: String },
    #[error("worker {worker} failed during the {stage} stage: {source}")]
    Solver {
        worker: usize,
        stage: Stage,
        #[source]
        source: SolverError,
    },
    #[error("slowdown calibration for r_gc = {target} reached only {measured:.3}")]
    Calibration { target: f64, measured: f64 },
    #[error("run aborted by another worker")]
    Aborted,
}
