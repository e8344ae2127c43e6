//! Explicit Runge-Kutta marching and CFL time-step selection.
//!
//! The semi-discrete system is `dU/dt = -R(U) / |Omega|`.

use crate::error::SolverError;
use crate::mesh::BlockGeometry;
use crate::numerics::BlockState;
use crate::state::{primitive_from_conserved, speed_of_sound, Conserved, GasModel};

#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub s: usize,
    /// Row-major `s x s`; only the strictly lower triangle may be nonzero.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl ButcherTableau {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self, SolverError> {
        let s = b.len();
        if s == 0 || a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(SolverError::InvalidParameter(
                "tableau must be square with one weight per stage".into(),
            ));
        }
        for (i, row) in a.iter().enumerate() {
            if row[i..].iter().any(|&x| x != 0.0) {
                return Err(SolverError::InvalidParameter(format!(
                    "tableau row {i} is not explicit"
                )));
            }
        }
        let sum: f64 = b.iter().sum();
        if (sum - 1.0).abs() > 1e-15 {
            return Err(SolverError::InvalidParameter(format!(
                "tableau weights sum to {sum}, not 1"
            )));
        }
        Ok(Self { s, a, b })
    }

    /// Heun's method.
    pub fn heun_rk2() -> Self {
        Self::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.5, 0.5]).expect("valid tableau")
    }

    pub fn classical_rk4() -> Self {
        Self::new(
            vec![
                vec![0.0; 4],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        )
        .expect("valid tableau")
    }

    /// Coefficients that build the input of stage `k` (`k == s` gives the
    /// final weights).
    pub fn stage_coefficients(&self, k: usize) -> &[f64] {
        if k == self.s {
            &self.b
        } else {
            &self.a[k][..k]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk2,
    Rk4,
}

impl Scheme {
    pub fn tableau(self) -> ButcherTableau {
        match self {
            Scheme::Rk2 => ButcherTableau::heun_rk2(),
            Scheme::Rk4 => ButcherTableau::classical_rk4(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rk2 => "rk2",
            Scheme::Rk4 => "rk4",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk2" => Ok(Scheme::Rk2),
            "rk4" => Ok(Scheme::Rk4),
            other => Err(format!("unknown scheme '{other}' (expected rk2 or rk4)")),
        }
    }
}

/// `u_n - dt / vol * sum_l coeffs[l] R_l`, accumulated in stage order.
///
/// Every marching path goes through this function, which is what makes
/// decomposed runs bit-identical to serial ones.
#[inline]
pub fn combine_cell(u_n: Conserved, vol: f64, dt: f64, coeffs: &[f64], residuals: &[&[Conserved]], k: usize) -> Conserved {
    let mut acc = Conserved::ZERO;
    for (c, r) in coeffs.iter().zip(residuals) {
        if *c != 0.0 {
            acc += r[k] * *c;
        }
    }
    u_n - acc * (dt / vol)
}

/// Apply `combine_cell` to every cell.
pub fn combine(u_n: &[Conserved], volumes: &[f64], dt: f64, coeffs: &[f64], residuals: &[&[Conserved]]) -> Vec<Conserved> {
    (0..u_n.len())
        .map(|k| combine_cell(u_n[k], volumes[k], dt, coeffs, residuals, k))
        .collect()
}

/// One explicit RK step. `residual_fn(stage, U)` returns `R(U)` and is called
/// exactly `s` times.
pub fn rk_advance<F>(
    u_n: &[Conserved],
    volumes: &[f64],
    dt: f64,
    tableau: &ButcherTableau,
    mut residual_fn: F,
) -> Result<Vec<Conserved>, SolverError>
where
    F: FnMut(usize, &[Conserved]) -> Result<Vec<Conserved>, SolverError>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SolverError::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let mut residuals: Vec<Vec<Conserved>> = Vec::with_capacity(tableau.s);
    for k in 0..tableau.s {
        let stage_state = if k == 0 {
            u_n.to_vec()
        } else {
            let refs: Vec<&[Conserved]> = residuals.iter().map(|r| r.as_slice()).collect();
            combine(u_n, volumes, dt, tableau.stage_coefficients(k), &refs)
        };
        let r = residual_fn(k, &stage_state).map_err(|e| SolverError::Stage {
            stage: k,
            source: Box::new(e),
        })?;
        residuals.push(r);
    }
    let refs: Vec<&[Conserved]> = residuals.iter().map(|r| r.as_slice()).collect();
    Ok(combine(u_n, volumes, dt, tableau.stage_coefficients(tableau.s), &refs))
}

/// Largest stable step of the interior cells, `cfl * min |Omega| / sum_f (|Vn| + a) ds`.
pub fn stable_dt(state: &BlockState, geo: &BlockGeometry, cfl: f64, gas: &GasModel) -> Result<f64, SolverError> {
    if !(cfl > 0.0) || !cfl.is_finite() {
        return Err(SolverError::InvalidParameter(format!("cfl must be positive, got {cfl}")));
    }
    let g = state.ghost_depth;
    let mut best = f64::INFINITY;
    for j in g..g + state.nj {
        for i in g..g + state.ni {
            let v = primitive_from_conserved(state.get(i, j), gas)
                .map_err(|source| SolverError::InvalidState { i, j, source })?;
            let a = speed_of_sound(v, gas).map_err(|source| SolverError::InvalidState { i, j, source })?;
            let faces = [
                (geo.iface_normal[geo.iface(i, j)], geo.iface_area[geo.iface(i, j)]),
                (geo.iface_normal[geo.iface(i + 1, j)], geo.iface_area[geo.iface(i + 1, j)]),
                (geo.jface_normal[geo.jface(i, j)], geo.jface_area[geo.jface(i, j)]),
                (geo.jface_normal[geo.jface(i, j + 1)], geo.jface_area[geo.jface(i, j + 1)]),
            ];
            let radius: f64 = faces
                .iter()
                .map(|(n, ds)| (v.normal_velocity(n[0], n[1]).abs() + a) * ds)
                .sum();
            best = best.min(geo.volume[geo.cell(i, j)] / radius);
        }
    }
    Ok(cfl * best)
}
