//! Calorically perfect gas model and conserved/primitive state conversions.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum StateError {
    #[error("non-positive density {rho}")]
    NonPositiveDensity { rho: f64 },
    #[error("non-positive pressure {p}")]
    NonPositivePressure { p: f64 },
    #[error("invalid gas model: {0}")]
    InvalidGas(&'static str),
}

/// Cell-averaged conserved variables `(rho, rho*u, rho*v, rho*e_t)`.
///
/// Also used as the 4-component carrier for fluxes and residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conserved {
    pub rho: f64,
    pub rho_u: f64,
    pub rho_v: f64,
    pub rho_et: f64,
}

impl Conserved {
    pub const ZERO: Conserved = Conserved::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(rho: f64, rho_u: f64, rho_v: f64, rho_et: f64) -> Self {
        Self {
            rho,
            rho_u,
            rho_v,
            rho_et,
        }
    }

    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v, v)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.rho, self.rho_u, self.rho_v, self.rho_et]
    }

    /// Componentwise product.
    pub fn hadamard(self, o: Self) -> Self {
        Self::new(
            self.rho * o.rho,
            self.rho_u * o.rho_u,
            self.rho_v * o.rho_v,
            self.rho_et * o.rho_et,
        )
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(f(self.rho), f(self.rho_u), f(self.rho_v), f(self.rho_et))
    }

    pub fn zip_map(self, o: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(
            f(self.rho, o.rho),
            f(self.rho_u, o.rho_u),
            f(self.rho_v, o.rho_v),
            f(self.rho_et, o.rho_et),
        )
    }

    pub fn max_abs(self) -> f64 {
        self.to_array().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for Conserved {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        match k {
            0 => &self.rho,
            1 => &self.rho_u,
            2 => &self.rho_v,
            3 => &self.rho_et,
            _ => panic!("conserved component {k} out of range"),
        }
    }
}

impl IndexMut<usize> for Conserved {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        match k {
            0 => &mut self.rho,
            1 => &mut self.rho_u,
            2 => &mut self.rho_v,
            3 => &mut self.rho_et,
            _ => panic!("conserved component {k} out of range"),
        }
    }
}

impl Add for Conserved {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.zip_map(o, |a, b| a + b)
    }
}

impl AddAssign for Conserved {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Conserved {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.zip_map(o, |a, b| a - b)
    }
}

impl Neg for Conserved {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl Mul<f64> for Conserved {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|a| a * s)
    }
}

impl Mul<Conserved> for f64 {
    type Output = Conserved;
    fn mul(self, c: Conserved) -> Conserved {
        c * self
    }
}

/// Primitive variables `(rho, u, v, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
}

impl Primitive {
    pub const fn new(rho: f64, u: f64, v: f64, p: f64) -> Self {
        Self { rho, u, v, p }
    }

    pub fn validate(self) -> Result<Self, StateError> {
        if !(self.rho > 0.0) {
            return Err(StateError::NonPositiveDensity { rho: self.rho });
        }
        if !(self.p > 0.0) {
            return Err(StateError::NonPositivePressure { p: self.p });
        }
        Ok(self)
    }

    /// Velocity component along a unit normal.
    pub fn normal_velocity(&self, nx: f64, ny: f64) -> f64 {
        nx * self.u + ny * self.v
    }

    pub fn temperature(&self, gas: &GasModel) -> f64 {
        self.p / (self.rho * gas.r_gas)
    }

    pub fn mach(&self, gas: &GasModel) -> f64 {
        (self.u * self.u + self.v * self.v).sqrt() / (gas.gamma * self.p / self.rho).sqrt()
    }
}

/// Calorically perfect gas with constant viscosity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    pub gamma: f64,
    /// Specific gas constant, J/(kg K).
    pub r_gas: f64,
    /// Dynamic viscosity, Pa s.
    pub mu: f64,
    pub prandtl: f64,
}

impl Default for GasModel {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            r_gas: 287.0,
            mu: 1.716e-5,
            prandtl: 0.72,
        }
    }
}

impl GasModel {
    pub fn new(gamma: f64, r_gas: f64, mu: f64, prandtl: f64) -> Result<Self, StateError> {
        let gas = Self {
            gamma,
            r_gas,
            mu,
            prandtl,
        };
        gas.validate()
    }

    pub fn validate(self) -> Result<Self, StateError> {
        if !(self.gamma > 1.0) {
            return Err(StateError::InvalidGas("gamma must exceed 1"));
        }
        if !(self.r_gas > 0.0) {
            return Err(StateError::InvalidGas("gas constant must be positive"));
        }
        if !(self.mu >= 0.0) {
            return Err(StateError::InvalidGas("viscosity must be non-negative"));
        }
        if !(self.prandtl > 0.0) {
            return Err(StateError::InvalidGas("Prandtl number must be positive"));
        }
        Ok(self)
    }

    pub fn cp(&self) -> f64 {
        self.gamma * self.r_gas / (self.gamma - 1.0)
    }

    pub fn conductivity(&self) -> f64 {
        self.mu * self.cp() / self.prandtl
    }

    /// State from Mach number, static pressure and temperature, flowing along +x.
    pub fn freestream(&self, mach: f64, p: f64, t: f64) -> Primitive {
        let rho = p / (self.r_gas * t);
        let a = (self.gamma * self.r_gas * t).sqrt();
        Primitive::new(rho, mach * a, 0.0, p)
    }
}

pub fn primitive_from_conserved(u: Conserved, gas: &GasModel) -> Result<Primitive, StateError> {
    if !(u.rho > 0.0) {
        return Err(StateError::NonPositiveDensity { rho: u.rho });
    }
    let vx = u.rho_u / u.rho;
    let vy = u.rho_v / u.rho;
    let p = (gas.gamma - 1.0) * (u.rho_et - 0.5 * u.rho * (vx * vx + vy * vy));
    if !(p > 0.0) {
        return Err(StateError::NonPositivePressure { p });
    }
    Ok(Primitive::new(u.rho, vx, vy, p))
}

pub fn conserved_from_primitive(v: Primitive, gas: &GasModel) -> Conserved {
    let rho_et = v.p / (gas.gamma - 1.0) + 0.5 * v.rho * (v.u * v.u + v.v * v.v);
    Conserved::new(v.rho, v.rho * v.u, v.rho * v.v, rho_et)
}

/// Specific total enthalpy `h_t = e_t + p/rho`.
pub fn total_enthalpy(v: Primitive, gas: &GasModel) -> f64 {
    let et = v.p / ((gas.gamma - 1.0) * v.rho) + 0.5 * (v.u * v.u + v.v * v.v);
    et + v.p / v.rho
}

pub fn speed_of_sound(v: Primitive, gas: &GasModel) -> Result<f64, StateError> {
    let v = v.validate()?;
    Ok((gas.gamma * v.p / v.rho).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn air() -> GasModel {
        GasModel::default()
    }

    #[test]
    fn quiescent_state_inverts() {
        let v = primitive_from_conserved(Conserved::new(1.0, 0.0, 0.0, 2.5), &air()).unwrap();
        assert_eq!((v.rho, v.u, v.v), (1.0, 0.0, 0.0));
        assert!((v.p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inflow_state_from_mach_pressure_temperature() {
        let gas = air();
        let v = gas.freestream(4.0, 12270.0, 217.0);
        let rho = 12270.0 / (287.0 * 217.0);
        let a = (1.4f64 * 287.0 * 217.0).sqrt();
        assert!((v.rho - rho).abs() < 1e-15);
        assert!((v.rho - 0.19702).abs() < 1e-5);
        assert!((v.u - 4.0 * a).abs() < 1e-12);
        assert!((v.u - 1181.0).abs() / 1181.0 < 2e-4);
        assert_eq!(v.v, 0.0);
    }

    #[test]
    fn total_enthalpy_examples() {
        let gas = air();
        assert!((total_enthalpy(Primitive::new(1.0, 0.0, 0.0, 1.0), &gas) - 3.5).abs() < 1e-15);
        assert!((total_enthalpy(Primitive::new(1.0, 1.0, 0.0, 1.0), &gas) - 4.0).abs() < 1e-15);
        let v = gas.freestream(4.0, 12270.0, 217.0);
        let alt = gas.cp() * 217.0 + 0.5 * v.u * v.u;
        let ht = total_enthalpy(v, &gas);
        assert!((ht - alt).abs() / alt < 1e-13);
    }

    #[test]
    fn sound_speed_examples() {
        let gas = air();
        let a = speed_of_sound(Primitive::new(1.0, 0.3, -2.0, 1.0), &gas).unwrap();
        assert!((a - 1.4f64.sqrt()).abs() < 1e-15);
        assert!((a - 1.18322).abs() < 1e-5);
        let v = gas.freestream(4.0, 12270.0, 217.0);
        let a = speed_of_sound(v, &gas).unwrap();
        assert!((a - (1.4f64 * 287.0 * 217.0).sqrt()).abs() < 1e-10);
        assert!((a - 295.26).abs() < 0.05);
        assert!(speed_of_sound(Primitive::new(1.0, 0.0, 0.0, -1.0), &gas).is_err());
    }

    #[test]
    fn invalid_states_rejected() {
        let gas = air();
        assert!(matches!(
            primitive_from_conserved(Conserved::new(0.0, 0.0, 0.0, 1.0), &gas),
            Err(StateError::NonPositiveDensity { .. })
        ));
        assert!(matches!(
            primitive_from_conserved(Conserved::new(1.0, 3.0, 0.0, 1.0), &gas),
            Err(StateError::NonPositivePressure { .. })
        ));
        assert!(GasModel::new(1.0, 287.0, 0.0, 0.72).is_err());
        assert!(GasModel::new(1.4, 287.0, -1.0, 0.72).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            rho in 1e-3f64..1e3,
            u in -2e3f64..2e3,
            v in -2e3f64..2e3,
            p in 1e-1f64..1e6,
        ) {
            let gas = air();
            let prim = Primitive::new(rho, u, v, p);
            let cons = conserved_from_primitive(prim, &gas);
            let back = primitive_from_conserved(cons, &gas).unwrap();
            let again = conserved_from_primitive(back, &gas);
            for k in 0..4 {
                prop_assert!((again[k] - cons[k]).abs() <= 1e-15 * cons[k].abs(),
                    "component {} {} vs {}", k, again[k], cons[k]);
            }
        }

        #[test]
        fn normal_velocity_is_rotation_invariant(
            u in -10f64..10.0, v in -10f64..10.0, theta in 0f64..6.3, phi in -3.2f64..3.2,
        ) {
            let (nx, ny) = (theta.cos(), theta.sin());
            let (c, s) = (phi.cos(), phi.sin());
            let prim = Primitive::new(1.0, u, v, 1.0);
            let rotated = Primitive::new(1.0, c * u - s * v, s * u + c * v, 1.0);
            let vn = prim.normal_velocity(nx, ny);
            let vn_rot = rotated.normal_velocity(c * nx - s * ny, s * nx + c * ny);
            prop_assert!((vn - vn_rot).abs() <= 1e-14 * (u.abs() + v.abs()).max(1.0));
        }

        #[test]
        fn sound_speed_is_homogeneous(rho in 1e-2f64..10.0, p in 1e-2f64..10.0, k in 1e-3f64..1e3) {
            let gas = air();
            let a = speed_of_sound(Primitive::new(rho, 0.0, 0.0, p), &gas).unwrap();
            let b = speed_of_sound(Primitive::new(k * rho, 0.0, 0.0, k * p), &gas).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a);
        }
    }
}
