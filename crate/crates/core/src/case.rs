//! Ready-made flow problems: geometry, gas, boundaries, initial field and
//! optional source for each supported case kind.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::SolverError;
use crate::mesh::{build_cartesian_grid, build_ramp_grid, compute_metrics, BlockGeometry};
use crate::numerics::boundary::{BoundaryKind, BoundarySpec, ExactField};
use crate::numerics::mms::ManufacturedSolution;
use crate::numerics::{BlockState, FlowMode, MusclParams};
use crate::oracle::CouetteFlow;
use crate::state::{conserved_from_primitive, Conserved, GasModel, Primitive};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    CartesianMms,
    RampInlet,
    SodTube,
    Couette,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::CartesianMms => "cartesian_mms",
            CaseKind::RampInlet => "ramp_inlet",
            CaseKind::SodTube => "sod_tube",
            CaseKind::Couette => "couette",
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cartesian_mms" => Ok(CaseKind::CartesianMms),
            "ramp_inlet" => Ok(CaseKind::RampInlet),
            "sod_tube" => Ok(CaseKind::SodTube),
            "couette" => Ok(CaseKind::Couette),
            other => Err(format!(
                "unknown case '{other}' (expected cartesian_mms, ramp_inlet, sod_tube or couette)"
            )),
        }
    }
}

/// Limiter family used by the MUSCL reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimiterKind {
    VanAlbada,
    /// Unlimited reconstruction, for smooth verification problems.
    None,
}

impl LimiterKind {
    pub fn name(self) -> &'static str {
        match self {
            LimiterKind::VanAlbada => "van_albada",
            LimiterKind::None => "none",
        }
    }
}

impl FromStr for LimiterKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "van_albada" => Ok(LimiterKind::VanAlbada),
            "none" => Ok(LimiterKind::None),
            other => Err(format!("unknown limiter '{other}' (expected van_albada or none)")),
        }
    }
}

/// Everything needed to march one case, independent of how it is executed.
#[derive(Clone)]
pub struct FlowProblem {
    pub kind: CaseKind,
    pub geometry: Arc<BlockGeometry>,
    pub gas: GasModel,
    pub mode: FlowMode,
    pub muscl: MusclParams,
    pub limiter: LimiterKind,
    pub boundary: BoundarySpec,
    /// Initial field over the ghost frame.
    pub initial: BlockState,
    /// `|Omega| S` per interior cell, row-major.
    pub source: Option<Vec<Conserved>>,
    /// Exact solution, where one is known.
    pub exact: Option<ExactField>,
}

impl fmt::Debug for FlowProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowProblem")
            .field("kind", &self.kind)
            .field("ni", &self.geometry.ni)
            .field("nj", &self.geometry.nj)
            .field("mode", &self.mode)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

impl FlowProblem {
    pub fn ni(&self) -> usize {
        self.geometry.ni
    }

    pub fn nj(&self) -> usize {
        self.geometry.nj
    }

    /// Exact conserved values at the interior centroids, row-major.
    pub fn exact_interior(&self) -> Option<Vec<Conserved>> {
        let f = self.exact.as_ref()?;
        let geo = &self.geometry;
        let g = geo.ghost_depth;
        let mut out = Vec::with_capacity(geo.ni * geo.nj);
        for j in g..g + geo.nj {
            for i in g..g + geo.ni {
                let c = geo.cell(i, j);
                out.push(conserved_from_primitive(f(geo.centroid_x[c], geo.centroid_y[c]), &self.gas));
            }
        }
        Some(out)
    }
}

fn field_state(geo: &BlockGeometry, gas: &GasModel, f: impl Fn(f64, f64) -> Primitive) -> BlockState {
    let mut s = BlockState::uniform(geo.ni, geo.nj, Conserved::ZERO);
    for j in 0..geo.cells_j() {
        for i in 0..geo.cells_i() {
            let c = geo.cell(i, j);
            s.set(i, j, conserved_from_primitive(f(geo.centroid_x[c], geo.centroid_y[c]), gas));
        }
    }
    s
}

/// Ramp-inlet geometry parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampGeometry {
    pub angle_deg: f64,
    pub inlet_length: f64,
    pub ramp_length: f64,
    pub height: f64,
}

impl Default for RampGeometry {
    fn default() -> Self {
        Self {
            angle_deg: 30.0,
            inlet_length: 1.0,
            ramp_length: 2.0,
            height: 1.5,
        }
    }
}

/// Freestream inlet flow over a compression ramp, started impulsively from
/// the freestream state.
pub fn ramp_inlet(
    ni: usize,
    nj: usize,
    geom: RampGeometry,
    gas: GasModel,
    freestream: Primitive,
    mode: FlowMode,
    boundary: BoundarySpec,
) -> Result<FlowProblem, SolverError> {
    let grid = build_ramp_grid(ni, nj, geom.angle_deg, geom.inlet_length, geom.ramp_length, geom.height)?;
    let geo = compute_metrics(&grid)?;
    let initial = BlockState::from_primitive(ni, nj, freestream, &gas);
    Ok(FlowProblem {
        kind: CaseKind::RampInlet,
        geometry: Arc::new(geo),
        gas,
        mode,
        muscl: MusclParams::default(),
        limiter: LimiterKind::VanAlbada,
        boundary,
        initial,
        source: None,
        exact: None,
    })
}

/// Default ramp boundaries: inflow on the left, outflow on the right, and the
/// given kinds for the ramp surface and the upper edge.
pub fn ramp_boundaries(freestream: Primitive, bottom: BoundaryKind, top: BoundaryKind) -> BoundarySpec {
    BoundarySpec {
        left: BoundaryKind::SupersonicInflow(freestream),
        right: BoundaryKind::SupersonicOutflow,
        bottom,
        top,
    }
}

/// Euler manufactured solution on the unit square with exact boundary data,
/// started from the exact field.
pub fn cartesian_mms(n_i: usize, n_j: usize, gas: GasModel, solution: ManufacturedSolution) -> Result<FlowProblem, SolverError> {
    let geo = compute_metrics(&build_cartesian_grid(n_i, n_j, 1.0, 1.0)?)?;
    let source = solution.source_field(&geo, &gas);
    let initial = field_state(&geo, &gas, |x, y| solution.primitive(x, y));
    let exact = solution.exact_field();
    Ok(FlowProblem {
        kind: CaseKind::CartesianMms,
        geometry: Arc::new(geo),
        gas,
        mode: FlowMode::Euler,
        muscl: MusclParams::default(),
        limiter: LimiterKind::VanAlbada,
        boundary: BoundarySpec::uniform(BoundaryKind::Exact(exact.clone())),
        initial,
        source: Some(source),
        exact: Some(exact),
    })
}

/// Sod shock tube on `[0, 1]` with square cells, walls above and below.
pub fn sod_tube(ni: usize, nj: usize, gas: GasModel) -> Result<FlowProblem, SolverError> {
    let h = 1.0 / ni as f64;
    let geo = compute_metrics(&build_cartesian_grid(ni, nj, 1.0, h * nj as f64)?)?;
    let (left, right) = crate::oracle::SOD_STATES;
    let initial = field_state(&geo, &gas, |x, _| if x < 0.5 { left } else { right });
    Ok(FlowProblem {
        kind: CaseKind::SodTube,
        geometry: Arc::new(geo),
        gas,
        mode: FlowMode::Euler,
        muscl: MusclParams::default(),
        limiter: LimiterKind::VanAlbada,
        boundary: BoundarySpec {
            left: BoundaryKind::SupersonicOutflow,
            right: BoundaryKind::SupersonicOutflow,
            bottom: BoundaryKind::SlipWall,
            top: BoundaryKind::SlipWall,
        },
        initial,
        source: None,
        exact: None,
    })
}

/// Plane Couette flow between a fixed lower wall and a sliding upper wall,
/// started from rest at the wall temperature.
pub fn couette(ni: usize, nj: usize, length: f64, flow: CouetteFlow) -> Result<FlowProblem, SolverError> {
    let geo = compute_metrics(&build_cartesian_grid(ni, nj, length, flow.height)?)?;
    let gas = flow.gas;
    let rest = Primitive::new(flow.pressure / (gas.r_gas * flow.wall_temperature), 0.0, 0.0, flow.pressure);
    let initial = BlockState::from_primitive(ni, nj, rest, &gas);
    let exact: ExactField = Arc::new(move |_, y| flow.primitive(y));
    Ok(FlowProblem {
        kind: CaseKind::Couette,
        geometry: Arc::new(geo),
        gas,
        mode: FlowMode::NavierStokes,
        muscl: MusclParams::default(),
        limiter: LimiterKind::VanAlbada,
        // x-invariant flow: zero-gradient ends, exact wall data
        boundary: BoundarySpec {
            left: BoundaryKind::SupersonicOutflow,
            right: BoundaryKind::SupersonicOutflow,
            bottom: BoundaryKind::Exact(exact.clone()),
            top: BoundaryKind::Exact(exact.clone()),
        },
        initial,
        source: None,
        exact: Some(exact),
    })
}
