//! Limiter field and MUSCL face-state extrapolation.
//!
//! Face `f` of a line of cells separates cells `f-1` and `f`, and
//! `delta_f = Q_f - Q_{f-1}`. The two limiter families are
//!
//! * `psi_plus_f  = psi(delta_{f+1}, delta_f)` (downwind ratio),
//! * `psi_minus_f = psi(delta_{f-1}, delta_f)` (upwind ratio),
//!
//! so the reconstruction at face `i+1/2` reads `psi_plus_{i-1/2}`,
//! `psi_minus_{i+1/2}` on the left and `psi_plus_{i+1/2}`, `psi_minus_{i+3/2}`
//! on the right. Everything is applied per conserved component.

use crate::error::SolverError;
use crate::state::Conserved;

/// Additive guard in limiter denominators (and numerators, so that flat
/// regions give psi = 1).
pub const LIMITER_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MusclParams {
    /// 0 for first order, 1 for second order.
    pub epsilon: f64,
    pub kappa: f64,
}

impl Default for MusclParams {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            kappa: -1.0,
        }
    }
}

impl MusclParams {
    pub fn new(epsilon: f64, kappa: f64) -> Result<Self, SolverError> {
        if epsilon != 0.0 && epsilon != 1.0 {
            return Err(SolverError::InvalidParameter(format!(
                "MUSCL epsilon must be 0 or 1, got {epsilon}"
            )));
        }
        if !(-1.0..=1.0).contains(&kappa) {
            return Err(SolverError::InvalidParameter(format!(
                "MUSCL kappa must lie in [-1, 1], got {kappa}"
            )));
        }
        Ok(Self { epsilon, kappa })
    }

    pub fn first_order() -> Self {
        Self {
            epsilon: 0.0,
            kappa: -1.0,
        }
    }
}

/// Symmetric van Albada limiter of two consecutive differences, clipped to
/// `[0, 1]`.
#[inline]
pub fn van_albada(a: f64, b: f64) -> f64 {
    let psi = (2.0 * a * b + LIMITER_GUARD) / (a * a + b * b + LIMITER_GUARD);
    psi.max(0.0)
}

#[inline]
fn van_albada4(a: Conserved, b: Conserved) -> Conserved {
    a.zip_map(b, van_albada)
}

/// Limiter values of one line of cells, indexed by face `0..=n`.
/// Entries that the stencil cannot reach stay at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LineLimiters {
    pub plus: Vec<Conserved>,
    pub minus: Vec<Conserved>,
}

pub fn compute_limiters(line: &[Conserved]) -> LineLimiters {
    let n = line.len();
    let mut out = LineLimiters {
        plus: vec![Conserved::splat(1.0); n + 1],
        minus: vec![Conserved::splat(1.0); n + 1],
    };
    fill_line(line, &mut out.plus, &mut out.minus);
    out
}

fn fill_line(line: &[Conserved], plus: &mut [Conserved], minus: &mut [Conserved]) {
    let n = line.len();
    if n < 3 {
        return;
    }
    // delta at face f (1..n)
    let delta = |f: usize| line[f] - line[f - 1];
    for f in 1..n {
        let d = delta(f);
        if f + 1 < n {
            plus[f] = van_albada4(delta(f + 1), d);
        }
        if f >= 2 {
            minus[f] = van_albada4(delta(f - 1), d);
        }
    }
}

/// The limiter values MUSCL needs at face `i+1/2`:
/// `[psi_plus_{i-1/2}, psi_minus_{i+1/2}, psi_plus_{i+1/2}, psi_minus_{i+3/2}]`.
pub type FaceLimiters = [Conserved; 4];

pub fn muscl_reconstruct(
    stencil: [Conserved; 4],
    psi: FaceLimiters,
    params: MusclParams,
) -> (Conserved, Conserved) {
    let [q0, q1, q2, q3] = stencil;
    let d_up = q1 - q0;
    let d_mid = q2 - q1;
    let d_down = q3 - q2;
    let c = params.epsilon * 0.25;
    let lo = 1.0 - params.kappa;
    let hi = 1.0 + params.kappa;
    let left = q1 + (psi[0].hadamard(d_up) * lo + psi[1].hadamard(d_mid) * hi) * c;
    let right = q2 - (psi[2].hadamard(d_mid) * hi + psi[3].hadamard(d_down) * lo) * c;
    (left, right)
}

/// Limiters recomputed from the four-cell stencil alone, bit-identical to the
/// values `compute_limiters` stores for the same face.
pub fn stencil_limiters(stencil: [Conserved; 4]) -> FaceLimiters {
    let [q0, q1, q2, q3] = stencil;
    let d_up = q1 - q0;
    let d_mid = q2 - q1;
    let d_down = q3 - q2;
    [
        van_albada4(d_mid, d_up),
        van_albada4(d_up, d_mid),
        van_albada4(d_down, d_mid),
        van_albada4(d_mid, d_down),
    ]
}

/// Per-face limiters of a whole block: i-direction lines along interior rows,
/// j-direction lines along interior columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LimiterField {
    pub cells_i: usize,
    pub cells_j: usize,
    /// `(cells_i + 1) * cells_j`, indexed like i-faces.
    pub i_plus: Vec<Conserved>,
    pub i_minus: Vec<Conserved>,
    /// `cells_i * (cells_j + 1)`, indexed like j-faces.
    pub j_plus: Vec<Conserved>,
    pub j_minus: Vec<Conserved>,
}

impl LimiterField {
    pub fn new(cells_i: usize, cells_j: usize) -> Self {
        let one = Conserved::splat(1.0);
        Self {
            cells_i,
            cells_j,
            i_plus: vec![one; (cells_i + 1) * cells_j],
            i_minus: vec![one; (cells_i + 1) * cells_j],
            j_plus: vec![one; cells_i * (cells_j + 1)],
            j_minus: vec![one; cells_i * (cells_j + 1)],
        }
    }

    /// Limiters for i-face `ii` on row `j`.
    #[inline]
    pub fn iface(&self, ii: usize, j: usize) -> FaceLimiters {
        let row = j * (self.cells_i + 1);
        [
            self.i_plus[row + ii - 1],
            self.i_minus[row + ii],
            self.i_plus[row + ii],
            self.i_minus[row + ii + 1],
        ]
    }

    /// Limiters for j-face `jj` on column `i`.
    #[inline]
    pub fn jface(&self, i: usize, jj: usize) -> FaceLimiters {
        let w = self.cells_i;
        [
            self.j_plus[(jj - 1) * w + i],
            self.j_minus[jj * w + i],
            self.j_plus[jj * w + i],
            self.j_minus[(jj + 1) * w + i],
        ]
    }
}

/// One pass over the block filling the global limiter arrays.
pub fn compute_block_limiters(state: &crate::numerics::BlockState) -> LimiterField {
    let nx = state.cells_i();
    let ny = state.cells_j();
    let g = state.ghost_depth;
    let mut field = LimiterField::new(nx, ny);
    for j in g..g + state.nj {
        let row = j * (nx + 1);
        let k = state.index(0, j);
        let line = &state.cells[k..k + nx];
        let (plus, minus) = (
            &mut field.i_plus[row..row + nx + 1],
            &mut field.i_minus[row..row + nx + 1],
        );
        fill_line(line, plus, minus);
    }
    let mut line = Vec::with_capacity(ny);
    let mut plus = vec![Conserved::splat(1.0); ny + 1];
    let mut minus = vec![Conserved::splat(1.0); ny + 1];
    for i in g..g + state.ni {
        line.clear();
        line.extend((0..ny).map(|j| state.get(i, j)));
        fill_line(&line, &mut plus, &mut minus);
        for jj in 1..ny {
            field.j_plus[jj * nx + i] = plus[jj];
            field.j_minus[jj * nx + i] = minus[jj];
        }
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_line(vals: &[f64]) -> Vec<Conserved> {
        vals.iter().map(|&v| Conserved::splat(v)).collect()
    }

    #[test]
    fn uniform_line_gives_unit_limiters() {
        let lim = compute_limiters(&scalar_line(&[3.0; 8]));
        for f in 1..8 {
            assert_eq!(lim.plus[f], Conserved::splat(1.0));
            assert_eq!(lim.minus[f], Conserved::splat(1.0));
        }
    }

    #[test]
    fn linear_line_gives_unit_limiters() {
        let vals: Vec<f64> = (0..10).map(|k| 0.7 * k as f64 - 2.0).collect();
        let lim = compute_limiters(&scalar_line(&vals));
        for f in 1..10 {
            for k in 0..4 {
                assert!((lim.plus[f][k] - 1.0).abs() < 1e-6);
                assert!((lim.minus[f][k] - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn extremum_shuts_the_limiter() {
        // r = -1 at both faces around the peak
        let lim = compute_limiters(&scalar_line(&[0.0, 1.0, 2.0, 1.0, 0.0]));
        // faces 2 (1|2) and 3 (2|1) straddle the peak
        assert!(lim.plus[2].rho < 0.01);
        assert!(lim.minus[3].rho < 0.01);
        let va = van_albada(1.0, -1.0);
        assert_eq!(va, 0.0);
    }

    #[test]
    fn limiters_stay_in_unit_interval() {
        let vals = [0.0, 5.0, -3.0, 1e-9, 1e-9, 8.0, 7.5, 7.4, 100.0, -100.0];
        let lim = compute_limiters(&scalar_line(&vals));
        for v in lim.plus.iter().chain(&lim.minus) {
            assert!((0.0..=1.0).contains(&v.rho), "{v:?}");
        }
    }

    #[test]
    fn uniform_stencil_reconstructs_cell_value() {
        let q = Conserved::new(1.0, 2.0, 3.0, 4.0);
        let psi = stencil_limiters([q; 4]);
        let (l, r) = muscl_reconstruct([q; 4], psi, MusclParams::default());
        assert_eq!(l, q);
        assert_eq!(r, q);
    }

    #[test]
    fn first_order_fallback() {
        let s = [1.0, 4.0, 2.0, 9.0].map(Conserved::splat);
        let (l, r) = muscl_reconstruct(s, stencil_limiters(s), MusclParams::first_order());
        assert_eq!(l, s[1]);
        assert_eq!(r, s[2]);
    }

    #[test]
    fn linear_data_reconstructs_midpoint() {
        let i = 5.0;
        let s = [i - 1.0, i, i + 1.0, i + 2.0].map(Conserved::splat);
        for kappa in [-1.0, -0.5, 0.0, 1.0 / 3.0, 1.0] {
            let params = MusclParams::new(1.0, kappa).unwrap();
            let (l, r) = muscl_reconstruct(s, [Conserved::splat(1.0); 4], params);
            assert!((l.rho - (i + 0.5)).abs() < 1e-14);
            assert!((r.rho - (i + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn stored_and_stencil_limiters_agree() {
        let vals = [0.3, 1.1, 0.9, 2.4, 2.5, 2.45, -1.0, 0.0];
        let line = scalar_line(&vals);
        let lim = compute_limiters(&line);
        for f in 2..vals.len() - 1 {
            let s = [line[f - 2], line[f - 1], line[f], line[f + 1]];
            let inline = stencil_limiters(s);
            assert_eq!(
                inline,
                [lim.plus[f - 1], lim.minus[f], lim.plus[f], lim.minus[f + 1]]
            );
        }
    }

    #[test]
    fn params_validated() {
        assert!(MusclParams::new(0.5, 0.0).is_err());
        assert!(MusclParams::new(1.0, 1.5).is_err());
        assert!(MusclParams::new(0.0, -1.0).is_ok());
    }
}
