//! Manufactured solutions for the Euler equations.
//!
//! Each primitive field is `mean + ax sin(kx pi x) + ay cos(ky pi y)`. The
//! source term is the analytic divergence of the inviscid flux, evaluated with
//! forward-mode dual numbers so no hand-expanded derivatives are needed.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Sub};
use std::sync::Arc;

use crate::mesh::BlockGeometry;
use crate::numerics::boundary::ExactField;
use crate::state::{Conserved, GasModel, Primitive};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn constant(v: f64) -> Self {
        Self { v, d: 0.0 }
    }
    fn sin(self) -> Self {
        Self {
            v: self.v.sin(),
            d: self.d * self.v.cos(),
        }
    }
    fn cos(self) -> Self {
        Self {
            v: self.v.cos(),
            d: -self.d * self.v.sin(),
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            d: self.d + o.d,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            d: self.d - o.d,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
        }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, k: f64) -> Dual {
        Dual {
            v: self.v * k,
            d: self.d * k,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual {
            v: self.v / o.v,
            d: (self.d * o.v - self.v * o.d) / (o.v * o.v),
        }
    }
}

/// `mean + ax sin(kx pi x) + ay cos(ky pi y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsField {
    pub mean: f64,
    pub ax: f64,
    pub ay: f64,
    pub kx: f64,
    pub ky: f64,
}

impl MmsField {
    pub const fn constant(mean: f64) -> Self {
        Self {
            mean,
            ax: 0.0,
            ay: 0.0,
            kx: 1.0,
            ky: 1.0,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.mean + self.ax * (self.kx * PI * x).sin() + self.ay * (self.ky * PI * y).cos()
    }

    fn eval_dual(&self, x: Dual, y: Dual) -> Dual {
        Dual::constant(self.mean)
            + (x * (self.kx * PI)).sin() * self.ax
            + (y * (self.ky * PI)).cos() * self.ay
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub rho: MmsField,
    pub u: MmsField,
    pub v: MmsField,
    pub p: MmsField,
}

impl Default for ManufacturedSolution {
    /// Supersonic in both x and y (Mach about 2.1 along the diagonal) on the
    /// unit square, nondimensionalised so that the mean sound speed is 1.
    fn default() -> Self {
        Self {
            rho: MmsField {
                mean: 1.0,
                ax: 0.1,
                ay: 0.05,
                kx: 0.75,
                ky: 1.0,
            },
            u: MmsField {
                mean: 1.5,
                ax: 0.1,
                ay: 0.05,
                kx: 1.0,
                ky: 0.5,
            },
            v: MmsField {
                mean: 1.5,
                ax: 0.05,
                ay: 0.1,
                kx: 0.5,
                ky: 1.0,
            },
            p: MmsField {
                mean: 1.0 / 1.4,
                ax: 0.05,
                ay: 0.04,
                kx: 1.0,
                ky: 0.75,
            },
        }
    }
}

impl ManufacturedSolution {
    pub fn constant(v: Primitive) -> Self {
        Self {
            rho: MmsField::constant(v.rho),
            u: MmsField::constant(v.u),
            v: MmsField::constant(v.v),
            p: MmsField::constant(v.p),
        }
    }

    pub fn primitive(&self, x: f64, y: f64) -> Primitive {
        Primitive::new(
            self.rho.eval(x, y),
            self.u.eval(x, y),
            self.v.eval(x, y),
            self.p.eval(x, y),
        )
    }

    pub fn exact_field(&self) -> ExactField {
        let sol = *self;
        Arc::new(move |x, y| sol.primitive(x, y))
    }

    /// Inviscid fluxes `(F, G)` of the manufactured field.
    pub fn fluxes(&self, x: f64, y: f64, gas: &GasModel) -> (Conserved, Conserved) {
        let (f, g) = self.dual_fluxes(Dual::constant(x), Dual::constant(y), gas);
        (
            Conserved::from_array(f.map(|d| d.v)),
            Conserved::from_array(g.map(|d| d.v)),
        )
    }

    fn dual_fluxes(&self, x: Dual, y: Dual, gas: &GasModel) -> ([Dual; 4], [Dual; 4]) {
        let rho = self.rho.eval_dual(x, y);
        let u = self.u.eval_dual(x, y);
        let v = self.v.eval_dual(x, y);
        let p = self.p.eval_dual(x, y);
        let ke = (u * u + v * v) * 0.5;
        let rho_et = p * (1.0 / (gas.gamma - 1.0)) + rho * ke;
        let h = rho_et + p;
        let mu = rho * u;
        let mv = rho * v;
        (
            [mu, mu * u + p, mu * v, u * h],
            [mv, mv * u, mv * v + p, v * h],
        )
    }

    /// `dF/dx + dG/dy` at a point.
    pub fn source(&self, x: f64, y: f64, gas: &GasModel) -> Conserved {
        let seed_x = Dual { v: x, d: 1.0 };
        let seed_y = Dual { v: y, d: 1.0 };
        let (fx, _) = self.dual_fluxes(seed_x, Dual::constant(y), gas);
        let (_, gy) = self.dual_fluxes(Dual::constant(x), seed_y, gas);
        Conserved::new(
            fx[0].d + gy[0].d,
            fx[1].d + gy[1].d,
            fx[2].d + gy[2].d,
            fx[3].d + gy[3].d,
        )
    }

    /// Volume-weighted source (`|Omega| S` at the centroid) for every interior
    /// cell, row-major.
    pub fn source_field(&self, geo: &BlockGeometry, gas: &GasModel) -> Vec<Conserved> {
        let g = geo.ghost_depth;
        let mut out = Vec::with_capacity(geo.ni * geo.nj);
        for j in g..g + geo.nj {
            for i in g..g + geo.ni {
                let c = geo.cell(i, j);
                out.push(self.source(geo.centroid_x[c], geo.centroid_y[c], gas) * geo.volume[c]);
            }
        }
        out
    }
}

/// Source of the default manufactured solution at `(x, y)`.
pub fn mms_source(x: f64, y: f64, gas: &GasModel) -> Conserved {
    ManufacturedSolution::default().source(x, y, gas)
}
