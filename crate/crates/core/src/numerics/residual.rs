//! Spatial residual `R = sum_f (F_inv - F_visc) ds - |Omega| S` over the
//! interior cells of one block.
//!
//! Each face flux is computed exactly once and the per-cell sum is always
//! `((F_e - F_w) + (F_n - F_s)) - |Omega| S`, so identical inputs give
//! identical bits regardless of how the domain is cut into blocks.

use crate::error::SolverError;
use crate::mesh::BlockGeometry;
use crate::numerics::flux::{roe_flux, viscous_flux, FaceGradients};
use crate::numerics::gradient::gradient_green_gauss;
use crate::numerics::muscl::{
    muscl_reconstruct, stencil_limiters, FaceLimiters, LimiterField, MusclParams,
};
use crate::numerics::BlockState;
use crate::state::{primitive_from_conserved, Conserved, GasModel, Primitive};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMode {
    Euler,
    NavierStokes,
}

impl FlowMode {
    pub fn name(self) -> &'static str {
        match self {
            FlowMode::Euler => "euler",
            FlowMode::NavierStokes => "ns",
        }
    }
}

impl std::str::FromStr for FlowMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler" => Ok(FlowMode::Euler),
            "ns" => Ok(FlowMode::NavierStokes),
            other => Err(format!("unknown solver '{other}' (expected euler or ns)")),
        }
    }
}

/// Where face limiters come from.
#[derive(Debug, Clone, Copy)]
pub enum Limiters<'a> {
    /// Precomputed in a separate pass over the block.
    Stored(&'a LimiterField),
    /// Recomputed from each face's stencil.
    Inline,
    /// Psi = 1 everywhere (unlimited MUSCL, for smooth verification cases).
    Unlimited,
}

#[derive(Debug, Clone, Copy)]
pub struct ResidualContext<'a> {
    pub geo: &'a BlockGeometry,
    pub gas: GasModel,
    pub muscl: MusclParams,
    pub mode: FlowMode,
    /// `|Omega| S` per interior cell, row-major.
    pub source: Option<&'a [Conserved]>,
}

/// Face fluxes already multiplied by face area.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxes {
    pub ni: usize,
    pub nj: usize,
    /// `(ni + 1) * nj`, face `I` of interior row `j` at `j * (ni + 1) + I`.
    pub i: Vec<Conserved>,
    /// `ni * (nj + 1)`, face `J` of interior column `i` at `J * ni + i`.
    pub j: Vec<Conserved>,
}

fn prim(state: &BlockState, i: usize, j: usize, gas: &GasModel) -> Result<Primitive, SolverError> {
    primitive_from_conserved(state.get(i, j), gas).map_err(|source| SolverError::InvalidState {
        i,
        j,
        source,
    })
}

/// Reconstructed face states; falls back to first order when the
/// second-order states are not physical.
#[inline]
fn face_states(
    stencil: [Conserved; 4],
    psi: FaceLimiters,
    params: MusclParams,
    gas: &GasModel,
) -> Option<(Primitive, Primitive)> {
    if params.epsilon != 0.0 {
        let (l, r) = muscl_reconstruct(stencil, psi, params);
        if let (Ok(pl), Ok(pr)) = (
            primitive_from_conserved(l, gas),
            primitive_from_conserved(r, gas),
        ) {
            return Some((pl, pr));
        }
    }
    match (
        primitive_from_conserved(stencil[1], gas),
        primitive_from_conserved(stencil[2], gas),
    ) {
        (Ok(pl), Ok(pr)) => Some((pl, pr)),
        _ => None,
    }
}

struct Viscous {
    prims: Vec<Primitive>,
    grad_u: Vec<[f64; 2]>,
    grad_v: Vec<[f64; 2]>,
    grad_t: Vec<[f64; 2]>,
}

impl Viscous {
    fn new(state: &BlockState, geo: &BlockGeometry, gas: &GasModel) -> Result<Self, SolverError> {
        let nx = state.cells_i();
        let ny = state.cells_j();
        let mut prims = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                prims.push(prim(state, i, j, gas)?);
            }
        }
        let u: Vec<f64> = prims.iter().map(|p| p.u).collect();
        let v: Vec<f64> = prims.iter().map(|p| p.v).collect();
        let t: Vec<f64> = prims.iter().map(|p| p.temperature(gas)).collect();
        Ok(Self {
            grad_u: gradient_green_gauss(&u, geo),
            grad_v: gradient_green_gauss(&v, geo),
            grad_t: gradient_green_gauss(&t, geo),
            prims,
        })
    }

    fn flux(&self, a: usize, b: usize, n: [f64; 2], gas: &GasModel) -> Conserved {
        let avg = |g: &[[f64; 2]]| [0.5 * (g[a][0] + g[b][0]), 0.5 * (g[a][1] + g[b][1])];
        let grads = FaceGradients {
            du: avg(&self.grad_u),
            dv: avg(&self.grad_v),
            dt: avg(&self.grad_t),
        };
        let pa = self.prims[a];
        let pb = self.prims[b];
        let face = Primitive::new(
            0.5 * (pa.rho + pb.rho),
            0.5 * (pa.u + pb.u),
            0.5 * (pa.v + pb.v),
            0.5 * (pa.p + pb.p),
        );
        viscous_flux(&grads, &face, n, gas)
    }
}

pub fn face_fluxes(
    state: &BlockState,
    ctx: &ResidualContext<'_>,
    limiters: Limiters<'_>,
) -> Result<FaceFluxes, SolverError> {
    let geo = ctx.geo;
    let gas = ctx.gas;
    let g = state.ghost_depth;
    let (ni, nj) = (state.ni, state.nj);
    let nx = state.cells_i();
    debug_assert_eq!((geo.ni, geo.nj), (ni, nj));

    let viscous = match ctx.mode {
        FlowMode::NavierStokes => Some(Viscous::new(state, geo, &gas)?),
        FlowMode::Euler => None,
    };

    let cells = &state.cells;
    let mut fi = Vec::with_capacity((ni + 1) * nj);
    for j in g..g + nj {
        let row = j * nx;
        for ii in g..=g + ni {
            let k = row + ii;
            let stencil = [cells[k - 2], cells[k - 1], cells[k], cells[k + 1]];
            let psi = match limiters {
                Limiters::Stored(field) => field.iface(ii, j),
                Limiters::Inline => stencil_limiters(stencil),
                Limiters::Unlimited => [Conserved::splat(1.0); 4],
            };
            let (l, r) = face_states(stencil, psi, ctx.muscl, &gas)
                .ok_or_else(|| bad_cell(state, &gas, &[(ii - 1, j), (ii, j)]))?;
            let f = geo.iface(ii, j);
            let n = geo.iface_normal[f];
            let mut flux = roe_flux(&l, &r, n, &gas);
            if let Some(v) = &viscous {
                flux = flux - v.flux(k - 1, k, n, &gas);
            }
            fi.push(flux * geo.iface_area[f]);
        }
    }

    let mut fj = Vec::with_capacity(ni * (nj + 1));
    for jj in g..=g + nj {
        for i in g..g + ni {
            let k = jj * nx + i;
            let stencil = [cells[k - 2 * nx], cells[k - nx], cells[k], cells[k + nx]];
            let psi = match limiters {
                Limiters::Stored(field) => field.jface(i, jj),
                Limiters::Inline => stencil_limiters(stencil),
                Limiters::Unlimited => [Conserved::splat(1.0); 4],
            };
            let (l, r) = face_states(stencil, psi, ctx.muscl, &gas)
                .ok_or_else(|| bad_cell(state, &gas, &[(i, jj - 1), (i, jj)]))?;
            let f = geo.jface(i, jj);
            let n = geo.jface_normal[f];
            let mut flux = roe_flux(&l, &r, n, &gas);
            if let Some(v) = &viscous {
                flux = flux - v.flux(k - nx, k, n, &gas);
            }
            fj.push(flux * geo.jface_area[f]);
        }
    }
    Ok(FaceFluxes {
        ni,
        nj,
        i: fi,
        j: fj,
    })
}

fn bad_cell(state: &BlockState, gas: &GasModel, cells: &[(usize, usize)]) -> SolverError {
    for &(i, j) in cells {
        if let Err(e) = prim(state, i, j, gas) {
            return e;
        }
    }
    // unreachable in practice: first order only fails on invalid cells
    SolverError::InvalidParameter("face reconstruction failed".into())
}

/// Combine face fluxes and source into per-cell residuals (interior,
/// row-major).
pub fn residual_from_fluxes(fluxes: &FaceFluxes, source: Option<&[Conserved]>) -> Vec<Conserved> {
    let (ni, nj) = (fluxes.ni, fluxes.nj);
    let mut out = Vec::with_capacity(ni * nj);
    for j in 0..nj {
        for i in 0..ni {
            let w = fluxes.i[j * (ni + 1) + i];
            let e = fluxes.i[j * (ni + 1) + i + 1];
            let s = fluxes.j[j * ni + i];
            let n = fluxes.j[(j + 1) * ni + i];
            let mut r = (e - w) + (n - s);
            if let Some(src) = source {
                r = r - src[j * ni + i];
            }
            out.push(r);
        }
    }
    out
}

/// Residual of every interior cell. Ghost cells must already be populated.
pub fn residual(
    state: &BlockState,
    ctx: &ResidualContext<'_>,
    limiters: Limiters<'_>,
) -> Result<Vec<Conserved>, SolverError> {
    let fluxes = face_fluxes(state, ctx, limiters)?;
    Ok(residual_from_fluxes(&fluxes, ctx.source))
}
