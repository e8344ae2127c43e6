//! Spatial discretisation: reconstruction, fluxes, gradients, boundaries and
//! the assembled residual.

pub mod block;
pub mod boundary;
pub mod flux;
pub mod gradient;
pub mod mms;
pub mod muscl;
pub mod residual;

pub use block::BlockState;
pub use boundary::{apply_boundary, BoundaryKind, BoundarySpec, Edge};
pub use flux::{inviscid_flux, viscous_flux, FaceGradients};
pub use gradient::gradient_green_gauss;
pub use mms::{mms_source, ManufacturedSolution};
pub use muscl::{
    compute_block_limiters, compute_limiters, muscl_reconstruct, LimiterField, MusclParams,
};
pub use residual::{residual, FlowMode, Limiters, ResidualContext};
