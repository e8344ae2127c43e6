//! Ghost-cell boundary enforcement.
//!
//! Edges in i (left/right) are filled on interior rows first; edges in j
//! (bottom/top) then sweep every column that is not owned by a connected
//! neighbour, which also fills the corner ghosts of physical i-edges.
//! Ghost columns of connected edges are filled, full height, by the ghost
//! exchange. Ghost layer `k` mirrors interior layer `k`, or the outermost
//! interior layer when the block is thinner than the ghost frame.

use std::fmt;
use std::sync::Arc;

use crate::error::SolverError;
use crate::mesh::BlockGeometry;
use crate::numerics::BlockState;
use crate::state::{conserved_from_primitive, primitive_from_conserved, GasModel, Primitive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];
}

/// Exact primitive field evaluated at ghost-cell centroids.
pub type ExactField = Arc<dyn Fn(f64, f64) -> Primitive + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryKind {
    SupersonicInflow(Primitive),
    SupersonicOutflow,
    SlipWall,
    NoSlipAdiabaticWall,
    /// Filled by the ghost exchange with the given neighbour worker.
    Connected(usize),
    /// Dirichlet data from an exact solution (manufactured or analytic cases).
    Exact(ExactField),
}

impl fmt::Debug for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryKind::SupersonicInflow(p) => {
                f.debug_tuple("SupersonicInflow").field(p).finish()
            }
            BoundaryKind::SupersonicOutflow => f.write_str("SupersonicOutflow"),
            BoundaryKind::SlipWall => f.write_str("SlipWall"),
            BoundaryKind::NoSlipAdiabaticWall => f.write_str("NoSlipAdiabaticWall"),
            BoundaryKind::Connected(n) => f.debug_tuple("Connected").field(n).finish(),
            BoundaryKind::Exact(_) => f.write_str("Exact(..)"),
        }
    }
}

impl BoundaryKind {
    pub fn is_connected(&self) -> bool {
        matches!(self, BoundaryKind::Connected(_))
    }
}

#[derive(Debug, Clone)]
pub struct BoundarySpec {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

impl BoundarySpec {
    pub fn uniform(kind: BoundaryKind) -> Self {
        Self {
            left: kind.clone(),
            right: kind.clone(),
            bottom: kind.clone(),
            top: kind,
        }
    }

    pub fn edge(&self, edge: Edge) -> &BoundaryKind {
        match edge {
            Edge::Left => &self.left,
            Edge::Right => &self.right,
            Edge::Bottom => &self.bottom,
            Edge::Top => &self.top,
        }
    }

    pub fn edge_mut(&mut self, edge: Edge) -> &mut BoundaryKind {
        match edge {
            Edge::Left => &mut self.left,
            Edge::Right => &mut self.right,
            Edge::Bottom => &mut self.bottom,
            Edge::Top => &mut self.top,
        }
    }

    /// Connected edges must come in mutually paired sets; only the i-edges may
    /// be connected in a 1D decomposition.
    pub fn validate_pairing(specs: &[BoundarySpec]) -> Result<(), SolverError> {
        for (id, s) in specs.iter().enumerate() {
            for (edge, partner_edge) in [(Edge::Left, Edge::Right), (Edge::Right, Edge::Left)] {
                if let BoundaryKind::Connected(nb) = s.edge(edge) {
                    let ok = specs
                        .get(*nb)
                        .map(|o| matches!(o.edge(partner_edge), BoundaryKind::Connected(b) if *b == id))
                        .unwrap_or(false);
                    if !ok {
                        return Err(SolverError::InvalidParameter(format!(
                            "block {id} {edge:?} edge connects to {nb} without a matching partner"
                        )));
                    }
                }
            }
            if s.bottom.is_connected() || s.top.is_connected() {
                return Err(SolverError::InvalidParameter(format!(
                    "block {id} connects a j-edge; only i-edges may be connected"
                )));
            }
        }
        Ok(())
    }
}

fn ghost_value(
    kind: &BoundaryKind,
    state: &BlockState,
    geo: &BlockGeometry,
    ghost: (usize, usize),
    mirror: (usize, usize),
    first: (usize, usize),
    normal: [f64; 2],
    gas: &GasModel,
) -> Result<Option<crate::state::Conserved>, SolverError> {
    let prim_at =
        |(i, j): (usize, usize)| {
            primitive_from_conserved(state.get(i, j), gas)
                .map_err(|source| SolverError::InvalidState { i, j, source })
        };
    let value = match kind {
        BoundaryKind::Connected(_) => return Ok(None),
        BoundaryKind::SupersonicInflow(p) => conserved_from_primitive(*p, gas),
        BoundaryKind::SupersonicOutflow => state.get(first.0, first.1),
        BoundaryKind::SlipWall => {
            let v = prim_at(mirror)?;
            let vn = v.normal_velocity(normal[0], normal[1]);
            let m = Primitive::new(
                v.rho,
                v.u - 2.0 * vn * normal[0],
                v.v - 2.0 * vn * normal[1],
                v.p,
            );
            conserved_from_primitive(m, gas)
        }
        BoundaryKind::NoSlipAdiabaticWall => {
            let v = prim_at(mirror)?;
            conserved_from_primitive(Primitive::new(v.rho, -v.u, -v.v, v.p), gas)
        }
        BoundaryKind::Exact(f) => {
            let c = geo.cell(ghost.0, ghost.1);
            conserved_from_primitive(f(geo.centroid_x[c], geo.centroid_y[c]), gas)
        }
    };
    Ok(Some(value))
}

/// Populate the ghost cells of every physical edge.
pub fn apply_boundary(
    state: &mut BlockState,
    geo: &BlockGeometry,
    spec: &BoundarySpec,
    gas: &GasModel,
) -> Result<(), SolverError> {
    let g = state.ghost_depth;
    let (ni, nj) = (state.ni, state.nj);
    let nx = state.cells_i();
    let ny = state.cells_j();

    for j in g..g + nj {
        if !spec.left.is_connected() {
            let normal = geo.iface_normal[geo.iface(g, j)];
            for k in 1..=g {
                let ghost = (g - k, j);
                let mirror = (g - 1 + k.min(ni), j);
                if let Some(v) =
                    ghost_value(&spec.left, state, geo, ghost, mirror, (g, j), normal, gas)?
                {
                    state.set(ghost.0, ghost.1, v);
                }
            }
        }
        if !spec.right.is_connected() {
            let normal = geo.iface_normal[geo.iface(g + ni, j)];
            for k in 1..=g {
                let ghost = (g + ni - 1 + k, j);
                let mirror = (g + ni - k.min(ni), j);
                if let Some(v) = ghost_value(
                    &spec.right,
                    state,
                    geo,
                    ghost,
                    mirror,
                    (g + ni - 1, j),
                    normal,
                    gas,
                )? {
                    state.set(ghost.0, ghost.1, v);
                }
            }
        }
    }

    let i_lo = if spec.left.is_connected() { g } else { 0 };
    let i_hi = if spec.right.is_connected() {
        g + ni
    } else {
        nx
    };
    debug_assert!(ny == nj + 2 * g);
    for i in i_lo..i_hi {
        let normal = geo.jface_normal[geo.jface(i, g)];
        for k in 1..=g {
            let ghost = (i, g - k);
            let mirror = (i, g - 1 + k.min(nj));
            if let Some(v) =
                ghost_value(&spec.bottom, state, geo, ghost, mirror, (i, g), normal, gas)?
            {
                state.set(ghost.0, ghost.1, v);
            }
        }
        let normal = geo.jface_normal[geo.jface(i, g + nj)];
        for k in 1..=g {
            let ghost = (i, g + nj - 1 + k);
            let mirror = (i, g + nj - k.min(nj));
            if let Some(v) = ghost_value(
                &spec.top,
                state,
                geo,
                ghost,
                mirror,
                (i, g + nj - 1),
                normal,
                gas,
            )? {
                state.set(ghost.0, ghost.1, v);
            }
        }
    }
    Ok(())
}

/// Number of boundary-enforced cells along physical edges (one per edge cell).
pub fn physical_boundary_cells(spec: &BoundarySpec, ni: usize, nj: usize) -> usize {
    Edge::ALL
        .iter()
        .filter(|e| !spec.edge(**e).is_connected())
        .map(|e| match e {
            Edge::Left | Edge::Right => nj,
            Edge::Bottom | Edge::Top => ni,
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_cartesian_grid, compute_metrics};
    use crate::state::Conserved;

    fn setup(ni: usize, nj: usize) -> (BlockState, BlockGeometry, GasModel) {
        let gas = GasModel::default();
        let geo = compute_metrics(&build_cartesian_grid(ni, nj, 1.0, 1.0).unwrap()).unwrap();
        let state = BlockState::from_primitive(ni, nj, Primitive::new(1.0, 2.0, 3.0, 4.0), &gas);
        (state, geo, gas)
    }

    #[test]
    fn slip_wall_mirrors_normal_velocity() {
        let (mut state, geo, gas) = setup(3, 3);
        let spec = BoundarySpec {
            left: BoundaryKind::SupersonicOutflow,
            right: BoundaryKind::SupersonicOutflow,
            bottom: BoundaryKind::SlipWall,
            top: BoundaryKind::SlipWall,
        };
        apply_boundary(&mut state, &geo, &spec, &gas).unwrap();
        for i in 0..state.cells_i() {
            for j in [0, 1, 5, 6] {
                let v = primitive_from_conserved(state.get(i, j), &gas).unwrap();
                assert!((v.rho - 1.0).abs() < 1e-14);
                assert!((v.u - 2.0).abs() < 1e-14);
                assert!((v.v + 3.0).abs() < 1e-14);
                assert!((v.p - 4.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn outflow_copies_uniform_interior() {
        let (mut state, geo, gas) = setup(4, 2);
        let interior = state.get(2, 2);
        state.cells.iter_mut().for_each(|c| *c = Conserved::ZERO);
        let g = 2;
        for j in g..g + 2 {
            for i in g..g + 4 {
                state.set(i, j, interior);
            }
        }
        apply_boundary(
            &mut state,
            &geo,
            &BoundarySpec::uniform(BoundaryKind::SupersonicOutflow),
            &gas,
        )
        .unwrap();
        assert!(state.cells.iter().all(|c| *c == interior));
    }

    #[test]
    fn inflow_sets_freestream() {
        let (mut state, geo, gas) = setup(3, 2);
        let free = gas.freestream(4.0, 12270.0, 217.0);
        let spec = BoundarySpec::uniform(BoundaryKind::SupersonicInflow(free));
        apply_boundary(&mut state, &geo, &spec, &gas).unwrap();
        let q = conserved_from_primitive(free, &gas);
        assert_eq!(state.get(0, 2), q);
        assert_eq!(state.get(1, 3), q);
        assert_eq!(state.get(6, 0), q);
        let v = primitive_from_conserved(state.get(0, 2), &gas).unwrap();
        assert!((v.mach(&gas) - 4.0).abs() < 1e-12);
        assert!((v.p - 12270.0).abs() < 1e-8);
        assert!((v.temperature(&gas) - 217.0).abs() < 1e-10);
    }

    #[test]
    fn no_slip_negates_velocity() {
        let (mut state, geo, gas) = setup(2, 2);
        apply_boundary(
            &mut state,
            &geo,
            &BoundarySpec::uniform(BoundaryKind::NoSlipAdiabaticWall),
            &gas,
        )
        .unwrap();
        let v = primitive_from_conserved(state.get(2, 1), &gas).unwrap();
        assert!((v.u + 2.0).abs() < 1e-14 && (v.v + 3.0).abs() < 1e-14);
        assert!((v.p - 4.0).abs() < 1e-12 && (v.rho - 1.0).abs() < 1e-15);
    }

    #[test]
    fn connected_edges_untouched() {
        let (mut state, geo, gas) = setup(3, 3);
        let marker = Conserved::new(9.0, 0.0, 0.0, 99.0);
        for j in 0..state.cells_j() {
            state.set(0, j, marker);
            state.set(1, j, marker);
        }
        let spec = BoundarySpec {
            left: BoundaryKind::Connected(1),
            right: BoundaryKind::SupersonicOutflow,
            bottom: BoundaryKind::SlipWall,
            top: BoundaryKind::SlipWall,
        };
        apply_boundary(&mut state, &geo, &spec, &gas).unwrap();
        for j in 0..state.cells_j() {
            assert_eq!(state.get(0, j), marker);
            assert_eq!(state.get(1, j), marker);
        }
    }

    #[test]
    fn single_row_block_mirrors_its_only_row() {
        let (mut state, geo, gas) = setup(3, 1);
        let spec = BoundarySpec {
            left: BoundaryKind::SupersonicOutflow,
            right: BoundaryKind::SupersonicOutflow,
            bottom: BoundaryKind::SlipWall,
            top: BoundaryKind::SlipWall,
        };
        for j in [0, 1, 3, 4] {
            for i in 0..state.cells_i() {
                state.set(i, j, Conserved::ZERO);
            }
        }
        apply_boundary(&mut state, &geo, &spec, &gas).unwrap();
        for j in [0, 1, 3, 4] {
            let v = primitive_from_conserved(state.get(3, j), &gas).unwrap();
            assert!((v.v + 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pairing_validation() {
        let phys = BoundaryKind::SupersonicOutflow;
        let a = BoundarySpec {
            right: BoundaryKind::Connected(1),
            ..BoundarySpec::uniform(phys.clone())
        };
        let b = BoundarySpec {
            left: BoundaryKind::Connected(0),
            ..BoundarySpec::uniform(phys.clone())
        };
        assert!(BoundarySpec::validate_pairing(&[a.clone(), b]).is_ok());
        assert!(BoundarySpec::validate_pairing(&[a, BoundarySpec::uniform(phys)]).is_err());
    }
}
