//! Shared fixtures for the benchmarks.

use hfv_core::case::{self, RampGeometry};
use hfv_core::numerics::{BoundaryKind, FlowMode};
use hfv_core::{FlowProblem, GasModel};

/// Default ramp inlet at Mach 4, freshly started.
pub fn ramp(ni: usize, nj: usize, mode: FlowMode) -> FlowProblem {
    let gas = GasModel::default();
    let free = gas.freestream(4.0, 12270.0, 217.0);
    let bottom = match mode {
        FlowMode::Euler => BoundaryKind::SlipWall,
        FlowMode::NavierStokes => BoundaryKind::NoSlipAdiabaticWall,
    };
    let bc = case::ramp_boundaries(free, bottom, BoundaryKind::SupersonicOutflow);
    case::ramp_inlet(ni, nj, RampGeometry::default(), gas, free, mode, bc).expect("valid ramp")
}
