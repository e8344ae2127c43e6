//! Finite-volume compressible flow on structured blocks, a heterogeneous
//! worker pool that marches it, and the analytic performance model used to
//! predict that pool's speedup.

pub mod case;
pub mod decomp;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod metrics;
pub mod numerics;
pub mod oracle;
pub mod perf_model;
pub mod solver;
pub mod state;
pub mod time_integration;

pub use case::{CaseKind, FlowProblem, LimiterKind};
pub use error::SolverError;
pub use mesh::{build_cartesian_grid, build_ramp_grid, compute_metrics, BlockGeometry, BlockGrid};
pub use state::{Conserved, GasModel, Primitive};
