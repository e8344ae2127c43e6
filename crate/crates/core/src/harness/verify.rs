//! Verification suites with pass/fail thresholds.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::case::{self, RampGeometry};
use crate::decomp::{run_heterogeneous, ExecSettings, WorkerSpec};
use crate::numerics::mms::ManufacturedSolution;
use crate::numerics::{BoundaryKind, FlowMode};
use crate::oracle::{oblique_shock, CouetteFlow};
use crate::solver::SerialSolver;
use crate::state::{primitive_from_conserved, Conserved, GasModel};
use crate::time_integration::ButcherTableau;

use super::{create, io_err, CaseConfig, HarnessError};

pub const MMS_MIN_ORDER: f64 = 1.8;
pub const SHOCK_TOLERANCE: f64 = 0.02;
pub const COUETTE_TOLERANCE: f64 = 1e-3;
pub const DECOMP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Mms,
    Shock,
    Couette,
    Decomp,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Mms, Suite::Shock, Suite::Couette, Suite::Decomp];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Mms => "mms",
            Suite::Shock => "shock",
            Suite::Couette => "couette",
            Suite::Decomp => "decomp",
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite '{s}' (expected mms, shock, couette or decomp)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub suite: Suite,
    pub passed: bool,
    /// Name of the judged quantity.
    pub quantity: &'static str,
    pub measured: f64,
    pub threshold: f64,
    /// Supporting measurements.
    pub details: Vec<(String, f64)>,
}

impl fmt::Display for VerifyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cmp = match self.suite {
            Suite::Mms => ">=",
            Suite::Decomp => "<",
            _ => "<=",
        };
        write!(
            f,
            "{}: {} {:.6e} (threshold {cmp} {:e}) {}",
            self.suite.name(),
            self.quantity,
            self.measured,
            self.threshold,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Least-squares slope of `ln(err)` against `ln(h)`.
pub fn observed_order(h: &[f64], err: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn mms(config: &CaseConfig) -> Result<VerifyOutcome, HarnessError> {
    let mut details = Vec::new();
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for &n in &config.verify.grids {
        let mut problem = case::cartesian_mms(n, n, config.gas, ManufacturedSolution::default())?;
        problem.limiter = config.limiter;
        let mut s = SerialSolver::new(&problem, config.scheme.tableau(), config.cfl);
        s.run_to_steady(1e-10, 200_000)?;
        let exact = problem.exact_interior().expect("manufactured solution is exact");
        let l2 = (s
            .state
            .interior()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a.rho - b.rho).powi(2))
            .sum::<f64>()
            / exact.len() as f64)
            .sqrt();
        details.push((format!("l2_density_{n}x{n}"), l2));
        details.push((format!("steps_{n}x{n}"), s.steps as f64));
        hs.push(1.0 / n as f64);
        errs.push(l2);
    }
    let order = observed_order(&hs, &errs);
    Ok(VerifyOutcome {
        suite: Suite::Mms,
        passed: order >= MMS_MIN_ORDER,
        quantity: "observed order",
        measured: order,
        threshold: MMS_MIN_ORDER,
        details,
    })
}

/// Deflection of the shock-verification ramp.
pub const SHOCK_RAMP_DEG: f64 = 10.0;
pub const SHOCK_CFL: f64 = 0.8;

fn shock(config: &CaseConfig) -> Result<VerifyOutcome, HarnessError> {
    let gas = config.gas;
    let free = config.freestream();
    let geom = RampGeometry {
        angle_deg: SHOCK_RAMP_DEG,
        ..config.ramp
    };
    let (ni, nj) = (160, 80);
    // the upper edge sees undisturbed freestream
    let bc = case::ramp_boundaries(free, BoundaryKind::SlipWall, BoundaryKind::SupersonicInflow(free));
    let problem = case::ramp_inlet(ni, nj, geom, gas, free, FlowMode::Euler, bc)?;
    let mut s = SerialSolver::new(&problem, config.scheme.tableau(), SHOCK_CFL);
    s.run_steps(config.verify.shock_steps)?;

    let theta = SHOCK_RAMP_DEG.to_radians();
    let oracle = oblique_shock(free.mach(&gas), theta, gas.gamma)?;
    let geo = &problem.geometry;
    let g = geo.ghost_depth;
    let (x0, x1) = (geom.inlet_length + 0.5 * geom.ramp_length, geom.inlet_length + 0.95 * geom.ramp_length);
    let (mut p_sum, mut m_sum, mut n) = (0.0, 0.0, 0usize);
    for j in g..g + nj {
        for i in g..g + ni {
            let c = geo.cell(i, j);
            let (x, y) = (geo.centroid_x[c], geo.centroid_y[c]);
            if x < x0 || x > x1 {
                continue;
            }
            // sample between the ramp surface and the shock, away from both
            let d = x - geom.inlet_length;
            let (wall, front) = (d * theta.tan(), d * oracle.beta.tan());
            if y < wall + 0.1 * (front - wall) || y > wall + 0.7 * (front - wall) {
                continue;
            }
            let v = primitive_from_conserved(s.state.get(i, j), &gas).map_err(|source| crate::SolverError::InvalidState { i, j, source })?;
            p_sum += v.p / free.p;
            m_sum += v.mach(&gas);
            n += 1;
        }
    }
    let p_ratio = p_sum / n as f64;
    let mach = m_sum / n as f64;
    let p_err = (p_ratio / oracle.pressure_ratio - 1.0).abs();
    let m_err = (mach / oracle.mach_after - 1.0).abs();
    let worst = p_err.max(m_err);
    Ok(VerifyOutcome {
        suite: Suite::Shock,
        passed: worst <= SHOCK_TOLERANCE,
        quantity: "worst relative error of post-shock p/p_inf and Mach",
        measured: worst,
        threshold: SHOCK_TOLERANCE,
        details: vec![
            ("pressure_ratio".into(), p_ratio),
            ("pressure_ratio_exact".into(), oracle.pressure_ratio),
            ("mach".into(), mach),
            ("mach_exact".into(), oracle.mach_after),
            ("shock_angle_deg".into(), oracle.beta.to_degrees()),
            ("sampled_cells".into(), n as f64),
        ],
    })
}

fn couette() -> Result<VerifyOutcome, HarnessError> {
    let gas = GasModel::new(1.4, 1.0 / 1.4, 0.01, 0.72).map_err(|e| crate::SolverError::InvalidParameter(e.to_string()))?;
    let flow = CouetteFlow {
        gas,
        height: 1.0,
        wall_speed: 0.1,
        wall_temperature: 1.0,
        pressure: 1.0 / 1.4,
    };
    let (ni, nj) = (4, 20);
    let problem = case::couette(ni, nj, 0.2, flow)?;
    let mut s = SerialSolver::new(&problem, ButcherTableau::heun_rk2(), 0.5);
    let reduction = s.run_to_steady(1e-9, 200_000)?;
    let geo = &problem.geometry;
    let g = geo.ghost_depth;
    let mut worst: f64 = 0.0;
    for j in g..g + nj {
        for i in g..g + ni {
            let v = primitive_from_conserved(s.state.get(i, j), &gas).map_err(|source| crate::SolverError::InvalidState { i, j, source })?;
            let y = geo.centroid_y[geo.cell(i, j)];
            worst = worst.max((v.u - flow.velocity(y)).abs() / flow.wall_speed);
        }
    }
    Ok(VerifyOutcome {
        suite: Suite::Couette,
        passed: worst <= COUETTE_TOLERANCE,
        quantity: "max |u - u_exact| / U",
        measured: worst,
        threshold: COUETTE_TOLERANCE,
        details: vec![("steps".into(), s.steps as f64), ("residual_reduction".into(), reduction)],
    })
}

/// Largest difference between two solutions, per conserved component
/// relative to that component's largest magnitude.
pub fn max_relative_difference(a: &[Conserved], reference: &[Conserved]) -> f64 {
    let mut scale = [0.0f64; 4];
    for q in reference {
        for (s, v) in scale.iter_mut().zip(q.to_array()) {
            *s = s.max(v.abs());
        }
    }
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(reference) {
        for ((u, v), s) in x.to_array().iter().zip(y.to_array()).zip(scale) {
            worst = worst.max((u - v).abs() / s.max(f64::MIN_POSITIVE));
        }
    }
    if a.len() != reference.len() {
        worst = f64::INFINITY;
    }
    worst
}

fn decomp(config: &CaseConfig) -> Result<VerifyOutcome, HarnessError> {
    let gas = config.gas;
    let free = config.freestream();
    let bc = case::ramp_boundaries(free, BoundaryKind::SlipWall, BoundaryKind::SupersonicOutflow);
    let problem = case::ramp_inlet(120, 40, config.ramp, gas, free, FlowMode::Euler, bc)?;
    let settings = ExecSettings::new(ButcherTableau::classical_rk4(), config.cfl, config.verify.decomp_steps);
    let pools = [
        ("1 worker", WorkerSpec::new(1, 0, 1.0, 1.0)?),
        ("2 equal", WorkerSpec::new(0, 2, 1.0, 1.0)?),
        ("1 fast + 4 slow, W=8", WorkerSpec::new(1, 4, 8.0, 8.0)?),
        ("8 equal", WorkerSpec::new(0, 8, 1.0, 1.0)?),
    ];
    let mut solutions = Vec::new();
    for (_, spec) in &pools {
        solutions.push(run_heterogeneous(&problem, spec, &settings)?.solution);
    }
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    for ((name, _), sol) in pools.iter().zip(&solutions).skip(1) {
        let d = max_relative_difference(sol, &solutions[0]);
        details.push((format!("vs 1 worker: {name}"), d));
        worst = worst.max(d);
    }
    Ok(VerifyOutcome {
        suite: Suite::Decomp,
        passed: worst < DECOMP_TOLERANCE,
        quantity: "max relative difference across partitions",
        measured: worst,
        threshold: DECOMP_TOLERANCE,
        details,
    })
}

/// Run one suite and write `verify_<suite>.csv` into the output directory.
pub fn verify(suite: Suite, config: &CaseConfig) -> Result<VerifyOutcome, HarnessError> {
    let outcome = match suite {
        Suite::Mms => mms(config)?,
        Suite::Shock => shock(config)?,
        Suite::Couette => couette()?,
        Suite::Decomp => decomp(config)?,
    };
    let (path, mut f) = create(&config.resolved_output_dir(), &format!("verify_{}.csv", suite.name()))?;
    let mut write = || -> std::io::Result<()> {
        writeln!(f, "quantity,value")?;
        writeln!(f, "\"{}\",{:e}", outcome.quantity, outcome.measured)?;
        writeln!(f, "threshold,{:e}", outcome.threshold)?;
        writeln!(f, "passed,{}", outcome.passed)?;
        for (k, v) in &outcome.details {
            writeln!(f, "\"{k}\",{v:e}")?;
        }
        f.flush()
    };
    write().map_err(io_err(&path))?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_exact_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((observed_order(&h, &e) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn relative_difference_is_componentwise() {
        let a = vec![Conserved::new(1.0, 100.0, 0.0, 10.0); 3];
        let mut b = a.clone();
        assert_eq!(max_relative_difference(&b, &a), 0.0);
        b[1].rho_u += 1e-3;
        assert!((max_relative_difference(&b, &a) - 1e-5).abs() < 1e-15);
    }

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("decomposition".parse::<Suite>().is_err());
    }
}
