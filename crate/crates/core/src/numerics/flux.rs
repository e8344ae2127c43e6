//! Inviscid (Roe) and laminar viscous face fluxes, per unit face area.

use crate::state::{
    primitive_from_conserved, total_enthalpy, Conserved, GasModel, Primitive, StateError,
};

/// Harten entropy-fix width as a fraction of the Roe-averaged sound speed.
pub const ENTROPY_FIX_FRACTION: f64 = 0.1;
const DIVISION_FLOOR: f64 = 1e-12;

/// Analytic inviscid flux through a face with unit normal `n`.
pub fn physical_flux(v: &Primitive, n: [f64; 2], gas: &GasModel) -> Conserved {
    let vn = v.normal_velocity(n[0], n[1]);
    let ht = total_enthalpy(*v, gas);
    let mass = v.rho * vn;
    Conserved::new(
        mass,
        mass * v.u + n[0] * v.p,
        mass * v.v + n[1] * v.p,
        mass * ht,
    )
}

#[inline]
fn harten(lambda: f64, delta: f64) -> f64 {
    let a = lambda.abs();
    if a < delta {
        (lambda * lambda + delta * delta) / (2.0 * delta)
    } else {
        a
    }
}

/// Roe flux difference splitting with Harten's entropy fix on all waves.
pub fn roe_flux(l: &Primitive, r: &Primitive, n: [f64; 2], gas: &GasModel) -> Conserved {
    let [nx, ny] = n;
    let fl = physical_flux(l, n, gas);
    let fr = physical_flux(r, n, gas);

    let hl = total_enthalpy(*l, gas);
    let hr = total_enthalpy(*r, gas);
    let ratio = (r.rho / l.rho).sqrt();
    let wl = 1.0 / (1.0 + ratio);
    let wr = ratio * wl;
    let rho = ratio * l.rho;
    let u = wl * l.u + wr * r.u;
    let v = wl * l.v + wr * r.v;
    let h = wl * hl + wr * hr;
    let q2 = u * u + v * v;
    let a2 = ((gas.gamma - 1.0) * (h - 0.5 * q2)).max(DIVISION_FLOOR);
    let a = a2.sqrt();
    let vn = nx * u + ny * v;

    let d_rho = r.rho - l.rho;
    let d_p = r.p - l.p;
    let d_u = r.u - l.u;
    let d_v = r.v - l.v;
    let d_vn = nx * d_u + ny * d_v;

    let delta = (ENTROPY_FIX_FRACTION * a).max(DIVISION_FLOOR);
    let l1 = harten(vn - a, delta);
    let l2 = harten(vn, delta);
    let l3 = harten(vn + a, delta);

    let alpha1 = (d_p - rho * a * d_vn) / (2.0 * a2);
    let alpha2 = d_rho - d_p / a2;
    let alpha3 = (d_p + rho * a * d_vn) / (2.0 * a2);

    let r1 = Conserved::new(1.0, u - a * nx, v - a * ny, h - a * vn);
    let r2 = Conserved::new(1.0, u, v, 0.5 * q2);
    let r3 = Conserved::new(1.0, u + a * nx, v + a * ny, h + a * vn);
    let du_t = d_u - nx * d_vn;
    let dv_t = d_v - ny * d_vn;
    let shear = Conserved::new(0.0, du_t, dv_t, u * d_u + v * d_v - vn * d_vn) * rho;

    let dissipation = r1 * (l1 * alpha1) + (r2 * alpha2 + shear) * l2 + r3 * (l3 * alpha3);
    (fl + fr - dissipation) * 0.5
}

/// Roe flux between two conserved states.
pub fn inviscid_flux(
    ql: Conserved,
    qr: Conserved,
    n: [f64; 2],
    gas: &GasModel,
) -> Result<Conserved, StateError> {
    let l = primitive_from_conserved(ql, gas)?;
    let r = primitive_from_conserved(qr, gas)?;
    Ok(roe_flux(&l, &r, n, gas))
}

/// Velocity and temperature gradients at a face.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FaceGradients {
    pub du: [f64; 2],
    pub dv: [f64; 2],
    pub dt: [f64; 2],
}

/// Laminar viscous flux with Stokes' hypothesis (`lambda = -2 mu / 3`) and
/// Fourier conduction, `k = mu cp / Pr`.
pub fn viscous_flux(
    grad: &FaceGradients,
    face: &Primitive,
    n: [f64; 2],
    gas: &GasModel,
) -> Conserved {
    let mu = gas.mu;
    let k = gas.conductivity();
    let [ux, uy] = grad.du;
    let [vx, vy] = grad.dv;
    let div = ux + vy;
    let txx = mu * (2.0 * ux - 2.0 / 3.0 * div);
    let tyy = mu * (2.0 * vy - 2.0 / 3.0 * div);
    let txy = mu * (uy + vx);
    let theta_x = face.u * txx + face.v * txy + k * grad.dt[0];
    let theta_y = face.u * txy + face.v * tyy + k * grad.dt[1];
    Conserved::new(
        0.0,
        n[0] * txx + n[1] * txy,
        n[0] * txy + n[1] * tyy,
        n[0] * theta_x + n[1] * theta_y,
    )
}
