//! Single-block marching.

use crate::case::{FlowProblem, LimiterKind};
use crate::error::SolverError;
use crate::numerics::muscl::compute_block_limiters;
use crate::numerics::residual::{residual, Limiters, ResidualContext};
use crate::numerics::{apply_boundary, BlockState};
use crate::state::Conserved;
use crate::time_integration::{rk_advance, stable_dt, ButcherTableau};

/// Limiter pass followed by the residual; ghosts must be current.
pub fn interior_residual(
    state: &BlockState,
    ctx: &ResidualContext<'_>,
    limiter: LimiterKind,
) -> Result<Vec<Conserved>, SolverError> {
    match limiter {
        LimiterKind::VanAlbada => {
            let field = compute_block_limiters(state);
            residual(state, ctx, Limiters::Stored(&field))
        }
        LimiterKind::None => residual(state, ctx, Limiters::Unlimited),
    }
}

/// Cell volumes of the interior, row-major.
pub fn interior_volumes(problem: &FlowProblem) -> Vec<f64> {
    let geo = &problem.geometry;
    let g = geo.ghost_depth;
    let mut out = Vec::with_capacity(geo.ni * geo.nj);
    for j in g..g + geo.nj {
        for i in g..g + geo.ni {
            out.push(geo.volume[geo.cell(i, j)]);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SerialSolver<'a> {
    pub problem: &'a FlowProblem,
    pub tableau: ButcherTableau,
    pub cfl: f64,
    pub state: BlockState,
    pub time: f64,
    pub steps: usize,
    volumes: Vec<f64>,
    /// L2 norm of the density residual at the first stage of the last step.
    pub last_residual_norm: f64,
}

impl<'a> SerialSolver<'a> {
    pub fn new(problem: &'a FlowProblem, tableau: ButcherTableau, cfl: f64) -> Self {
        Self {
            problem,
            tableau,
            cfl,
            state: problem.initial.clone(),
            time: 0.0,
            steps: 0,
            volumes: interior_volumes(problem),
            last_residual_norm: f64::NAN,
        }
    }

    fn ctx(&self) -> ResidualContext<'a> {
        ResidualContext {
            geo: &self.problem.geometry,
            gas: self.problem.gas,
            muscl: self.problem.muscl,
            mode: self.problem.mode,
            source: self.problem.source.as_deref(),
        }
    }

    pub fn stable_dt(&self) -> Result<f64, SolverError> {
        stable_dt(&self.state, &self.problem.geometry, self.cfl, &self.problem.gas)
    }

    /// One step of at most `max_dt` (the CFL step when `None`); returns the
    /// step taken.
    pub fn step(&mut self, max_dt: Option<f64>) -> Result<f64, SolverError> {
        let mut dt = self.stable_dt()?;
        if let Some(m) = max_dt {
            dt = dt.min(m);
        }
        let ctx = self.ctx();
        let problem = self.problem;
        let u_n = self.state.interior();
        let mut work = self.state.clone();
        let mut first_norm = f64::NAN;
        let next = rk_advance(&u_n, &self.volumes, dt, &self.tableau, |k, stage| {
            work.set_interior(stage);
            apply_boundary(&mut work, &problem.geometry, &problem.boundary, &problem.gas)?;
            let r = interior_residual(&work, &ctx, problem.limiter)?;
            if k == 0 {
                first_norm = (r.iter().map(|c| c.rho * c.rho).sum::<f64>() / r.len() as f64).sqrt();
            }
            Ok(r)
        })?;
        self.state = work;
        self.state.set_interior(&next);
        self.time += dt;
        self.steps += 1;
        self.last_residual_norm = first_norm;
        Ok(dt)
    }

    pub fn run_steps(&mut self, steps: usize) -> Result<(), SolverError> {
        for _ in 0..steps {
            self.step(None)?;
        }
        Ok(())
    }

    /// March until `t_end`, shortening the last step to land on it.
    pub fn run_until(&mut self, t_end: f64) -> Result<(), SolverError> {
        while self.time < t_end * (1.0 - 1e-14) {
            self.step(Some(t_end - self.time))?;
        }
        Ok(())
    }

    /// March until the first-stage density residual has dropped by
    /// `reduction` relative to the first step, or `max_steps` is reached.
    /// Returns the achieved reduction.
    pub fn run_to_steady(&mut self, reduction: f64, max_steps: usize) -> Result<f64, SolverError> {
        self.step(None)?;
        let first = self.last_residual_norm.max(f64::MIN_POSITIVE);
        let mut ratio = 1.0;
        while self.steps < max_steps {
            self.step(None)?;
            ratio = self.last_residual_norm / first;
            if ratio <= reduction {
                break;
            }
        }
        Ok(ratio)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::{ramp_boundaries, ramp_inlet, sod_tube, RampGeometry};
    use crate::numerics::{BoundaryKind, FlowMode};
    use crate::oracle::{ExactRiemann, SOD_STATES};
    use crate::state::{primitive_from_conserved, GasModel};

    #[test]
    fn sod_matches_exact_riemann() {
        let gas = GasModel::default();
        let problem = sod_tube(200, 1, gas).unwrap();
        let mut s = SerialSolver::new(&problem, ButcherTableau::heun_rk2(), 0.5);
        s.run_until(0.2).unwrap();
        assert!((s.time - 0.2).abs() < 1e-12);
        let (l, r) = SOD_STATES;
        let exact = ExactRiemann::solve((l.rho, l.u, l.p), (r.rho, r.u, r.p), gas.gamma).unwrap();
        let geo = &problem.geometry;
        let interior = s.state.interior();
        let mut l1 = 0.0;
        for (i, q) in interior.iter().enumerate() {
            let c = geo.cell(i + 2, 2);
            let x = geo.centroid_x[c];
            let (rho, _, _) = exact.sample((x - 0.5) / 0.2);
            l1 += (q.rho - rho).abs() / 200.0;
        }
        assert!(l1 < 0.02, "L1 density error {l1}");
    }

    #[test]
    fn ramp_run_keeps_valid_states() {
        let gas = GasModel::default();
        let free = gas.freestream(4.0, 12270.0, 217.0);
        let bc = ramp_boundaries(free, BoundaryKind::SlipWall, BoundaryKind::SlipWall);
        let problem = ramp_inlet(24, 12, RampGeometry::default(), gas, free, FlowMode::Euler, bc).unwrap();
        let mut s = SerialSolver::new(&problem, ButcherTableau::heun_rk2(), 0.5);
        s.run_steps(20).unwrap();
        for q in s.state.interior() {
            primitive_from_conserved(q, &gas).unwrap();
        }
    }
}
