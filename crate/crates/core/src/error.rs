use thiserror::Error;

use crate::mesh::MeshError;
use crate::numerics::boundary::Edge;
use crate::state::StateError;

/// Failures raised while evaluating or marching the discrete equations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid state in cell ({i}, {j}): {source}")]
    InvalidState {
        i: usize,
        j: usize,
        #[source]
        source: StateError,
    },
    #[error("Runge-Kutta stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<SolverError>,
    },
    #[error("connected {edge:?} edge has no delivered ghost data")]
    MissingGhostData { edge: Edge },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl From<MeshError> for SolverError {
    fn from(e: MeshError) -> Self {
        SolverError::InvalidParameter(e.to_string())
    }
}
