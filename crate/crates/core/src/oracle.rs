//! Exact solutions used to judge the solver: the Riemann problem, oblique
//! shock relations, and compressible Couette flow.

use crate::error::SolverError;
use crate::state::{GasModel, Primitive};

/// Left and right states of Sod's shock tube.
pub const SOD_STATES: (Primitive, Primitive) = (
    Primitive::new(1.0, 0.0, 0.0, 1.0),
    Primitive::new(0.125, 0.0, 0.0, 0.1),
);

/// Exact solution of the 1D Riemann problem for a perfect gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactRiemann {
    pub left: (f64, f64, f64),
    pub right: (f64, f64, f64),
    pub gamma: f64,
    pub p_star: f64,
    pub u_star: f64,
}

impl ExactRiemann {
    /// States are `(rho, u, p)`.
    pub fn solve(left: (f64, f64, f64), right: (f64, f64, f64), gamma: f64) -> Result<Self, SolverError> {
        let (rl, ul, pl) = left;
        let (rr, ur, pr) = right;
        let al = (gamma * pl / rl).sqrt();
        let ar = (gamma * pr / rr).sqrt();
        if 2.0 * (al + ar) / (gamma - 1.0) <= ur - ul {
            return Err(SolverError::InvalidParameter("Riemann data generate vacuum".into()));
        }
        let f = |p: f64, rk: f64, pk: f64, ak: f64| -> (f64, f64) {
            if p > pk {
                let a = 2.0 / ((gamma + 1.0) * rk);
                let b = (gamma - 1.0) / (gamma + 1.0) * pk;
                let s = (a / (p + b)).sqrt();
                ((p - pk) * s, s * (1.0 - 0.5 * (p - pk) / (b + p)))
            } else {
                let e = (gamma - 1.0) / (2.0 * gamma);
                let r = p / pk;
                (2.0 * ak / (gamma - 1.0) * (r.powf(e) - 1.0), r.powf(-(gamma + 1.0) / (2.0 * gamma)) / (rk * ak))
            }
        };
        let mut p = (0.5 * (pl + pr)).max(1e-12);
        for _ in 0..100 {
            let (fl, dl) = f(p, rl, pl, al);
            let (fr, dr) = f(p, rr, pr, ar);
            let next = (p - (fl + fr + ur - ul) / (dl + dr)).max(1e-14);
            let change = 2.0 * (next - p).abs() / (next + p);
            p = next;
            if change < 1e-15 {
                break;
            }
        }
        let (fl, _) = f(p, rl, pl, al);
        let (fr, _) = f(p, rr, pr, ar);
        Ok(Self {
            left,
            right,
            gamma,
            p_star: p,
            u_star: 0.5 * (ul + ur) + 0.5 * (fr - fl),
        })
    }

    /// `(rho, u, p)` at similarity coordinate `xi = x / t`.
    pub fn sample(&self, xi: f64) -> (f64, f64, f64) {
        let g = self.gamma;
        let (ps, us) = (self.p_star, self.u_star);
        let g1 = (g - 1.0) / (g + 1.0);
        if xi <= us {
            let (rl, ul, pl) = self.left;
            let al = (g * pl / rl).sqrt();
            if ps > pl {
                let s = ul - al * ((g + 1.0) / (2.0 * g) * ps / pl + (g - 1.0) / (2.0 * g)).sqrt();
                if xi <= s {
                    self.left
                } else {
                    let r = ps / pl;
                    (rl * (r + g1) / (g1 * r + 1.0), us, ps)
                }
            } else {
                let head = ul - al;
                let a_star = al * (ps / pl).powf((g - 1.0) / (2.0 * g));
                let tail = us - a_star;
                if xi <= head {
                    self.left
                } else if xi >= tail {
                    (rl * (ps / pl).powf(1.0 / g), us, ps)
                } else {
                    let c = 2.0 / (g + 1.0) + g1 / al * (ul - xi);
                    let u = 2.0 / (g + 1.0) * (al + (g - 1.0) / 2.0 * ul + xi);
                    (rl * c.powf(2.0 / (g - 1.0)), u, pl * c.powf(2.0 * g / (g - 1.0)))
                }
            }
        } else {
            let (rr, ur, pr) = self.right;
            let ar = (g * pr / rr).sqrt();
            if ps > pr {
                let s = ur + ar * ((g + 1.0) / (2.0 * g) * ps / pr + (g - 1.0) / (2.0 * g)).sqrt();
                if xi >= s {
                    self.right
                } else {
                    let r = ps / pr;
                    (rr * (r + g1) / (g1 * r + 1.0), us, ps)
                }
            } else {
                let head = ur + ar;
                let a_star = ar * (ps / pr).powf((g - 1.0) / (2.0 * g));
                let tail = us + a_star;
                if xi >= head {
                    self.right
                } else if xi <= tail {
                    (rr * (ps / pr).powf(1.0 / g), us, ps)
                } else {
                    let c = 2.0 / (g + 1.0) - g1 / ar * (ur - xi);
                    let u = 2.0 / (g + 1.0) * (-ar + (g - 1.0) / 2.0 * ur + xi);
                    (rr * c.powf(2.0 / (g - 1.0)), u, pr * c.powf(2.0 * g / (g - 1.0)))
                }
            }
        }
    }
}

/// Weak attached oblique shock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObliqueShock {
    /// Shock angle (rad).
    pub beta: f64,
    pub pressure_ratio: f64,
    pub density_ratio: f64,
    pub temperature_ratio: f64,
    pub mach_after: f64,
}

/// Flow deflection produced by a shock at angle `beta`.
pub fn deflection_angle(mach: f64, beta: f64, gamma: f64) -> f64 {
    let m2s = (mach * beta.sin()).powi(2);
    (2.0 / beta.tan() * (m2s - 1.0) / (mach * mach * (gamma + (2.0 * beta).cos()) + 2.0)).atan()
}

/// Solve the theta-beta-Mach relation for the weak shock and apply the
/// normal-shock jump to the normal Mach component.
pub fn oblique_shock(mach: f64, theta: f64, gamma: f64) -> Result<ObliqueShock, SolverError> {
    if mach <= 1.0 || theta < 0.0 {
        return Err(SolverError::InvalidParameter(format!(
            "oblique shock needs M > 1 and theta >= 0, got M = {mach}, theta = {theta}"
        )));
    }
    let mu = (1.0 / mach).asin();
    // theta(beta) rises from 0 at the Mach angle to its maximum, then falls.
    let (mut lo, mut hi) = (mu, std::f64::consts::FRAC_PI_2);
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if deflection_angle(mach, a, gamma) < deflection_angle(mach, b, gamma) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let beta_max = 0.5 * (lo + hi);
    if theta > deflection_angle(mach, beta_max, gamma) {
        return Err(SolverError::InvalidParameter(format!(
            "deflection {theta} exceeds the attached-shock limit for M = {mach}"
        )));
    }
    let (mut lo, mut hi) = (mu, beta_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if deflection_angle(mach, mid, gamma) < theta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    let mn1 = mach * beta.sin();
    let m2 = mn1 * mn1;
    let pressure_ratio = 1.0 + 2.0 * gamma / (gamma + 1.0) * (m2 - 1.0);
    let density_ratio = (gamma + 1.0) * m2 / ((gamma - 1.0) * m2 + 2.0);
    let mn2 = (((gamma - 1.0) * m2 + 2.0) / (2.0 * gamma * m2 - (gamma - 1.0))).sqrt();
    Ok(ObliqueShock {
        beta,
        pressure_ratio,
        density_ratio,
        temperature_ratio: pressure_ratio / density_ratio,
        mach_after: mn2 / (beta - theta).sin(),
    })
}

/// Steady compressible Couette flow with both walls at `wall_temperature`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouetteFlow {
    pub gas: GasModel,
    pub height: f64,
    pub wall_speed: f64,
    pub wall_temperature: f64,
    pub pressure: f64,
}

impl CouetteFlow {
    pub fn velocity(&self, y: f64) -> f64 {
        self.wall_speed * y / self.height
    }

    /// Viscous heating balances conduction: `k T'' = -mu (U/H)^2`.
    pub fn temperature(&self, y: f64) -> f64 {
        let k = self.gas.conductivity();
        self.wall_temperature
            + self.gas.mu * self.wall_speed.powi(2) / (2.0 * k * self.height.powi(2)) * y * (self.height - y)
    }

    pub fn primitive(&self, y: f64) -> Primitive {
        let t = self.temperature(y);
        Primitive::new(self.pressure / (self.gas.r_gas * t), self.velocity(y), 0.0, self.pressure)
    }
}
