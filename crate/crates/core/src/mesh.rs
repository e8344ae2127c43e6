//! Structured quadrilateral blocks with a ghost frame and their finite-volume metrics.
//!
//! Index conventions used throughout the crate:
//!
//! * cells carry ghost-frame indices `(i, j)` with `i in 0..ni + 2g`, `j in 0..nj + 2g`;
//!   interior cells are `g..g + ni` by `g..g + nj`.
//! * nodes carry `(I, J)` with `I in 0..=ni + 2g`; cell `(i, j)` is bounded by nodes
//!   `(i, j)`, `(i+1, j)`, `(i+1, j+1)`, `(i, j+1)` in counter-clockwise order.
//! * i-face `(I, j)` separates cells `(I-1, j)` and `(I, j)`; its normal points towards
//!   increasing `i`. j-face `(i, J)` separates `(i, J-1)` and `(i, J)`, normal towards
//!   increasing `j`.

use std::fmt::Write as _;
use std::io::{self, BufRead};

use thiserror::Error;

/// Ghost cells per side. Two layers cover the four-cell MUSCL stencil.
pub const GHOST_DEPTH: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid grid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("non-positive volume {volume:e} in cell ({i}, {j})")]
    NonPositiveVolume { i: usize, j: usize, volume: f64 },
    #[error("malformed grid dump: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid {
    pub ni: usize,
    pub nj: usize,
    pub ghost_depth: usize,
    /// Node coordinates, row-major with `I` fastest.
    pub node_x: Vec<f64>,
    pub node_y: Vec<f64>,
}

impl BlockGrid {
    pub fn nodes_i(&self) -> usize {
        self.ni + 1 + 2 * self.ghost_depth
    }

    pub fn nodes_j(&self) -> usize {
        self.nj + 1 + 2 * self.ghost_depth
    }

    pub fn node_index(&self, ii: usize, jj: usize) -> usize {
        jj * self.nodes_i() + ii
    }

    pub fn node(&self, ii: usize, jj: usize) -> (f64, f64) {
        let k = self.node_index(ii, jj);
        (self.node_x[k], self.node_y[k])
    }

    /// Build a grid from interior node coordinates given by `f(I, J)` for
    /// `I in 0..=ni`, `J in 0..=nj`; ghost nodes are extrapolated linearly.
    fn from_interior_nodes(
        ni: usize,
        nj: usize,
        f: impl Fn(usize, usize) -> (f64, f64),
    ) -> BlockGrid {
        let g = GHOST_DEPTH;
        let nx = ni + 1 + 2 * g;
        let ny = nj + 1 + 2 * g;
        let mut node_x = vec![0.0; nx * ny];
        let mut node_y = vec![0.0; nx * ny];
        for jj in 0..=nj {
            for ii in 0..=ni {
                let (x, y) = f(ii, jj);
                let k = (jj + g) * nx + ii + g;
                node_x[k] = x;
                node_y[k] = y;
            }
        }
        let mut extrapolate = |dst: usize, a: usize, b: usize| {
            node_x[dst] = 2.0 * node_x[a] - node_x[b];
            node_y[dst] = 2.0 * node_y[a] - node_y[b];
        };
        // i-direction on interior node rows, then j-direction over every column.
        for jj in g..=nj + g {
            let row = jj * nx;
            for layer in 1..=g {
                let lo = g - layer;
                extrapolate(row + lo, row + lo + 1, row + lo + 2);
                let hi = ni + g + layer;
                extrapolate(row + hi, row + hi - 1, row + hi - 2);
            }
        }
        for ii in 0..nx {
            for layer in 1..=g {
                let lo = g - layer;
                extrapolate(lo * nx + ii, (lo + 1) * nx + ii, (lo + 2) * nx + ii);
                let hi = nj + g + layer;
                extrapolate(hi * nx + ii, (hi - 1) * nx + ii, (hi - 2) * nx + ii);
            }
        }
        BlockGrid {
            ni,
            nj,
            ghost_depth: g,
            node_x,
            node_y,
        }
    }

    /// Plain-text dump: header `ni nj ghost_depth`, then every node (ghosts
    /// included) row-major as `x y` with 17 significant digits.
    pub fn to_dump(&self) -> String {
        let mut out = String::with_capacity(self.node_x.len() * 48);
        let _ = writeln!(out, "{} {} {}", self.ni, self.nj, self.ghost_depth);
        for (x, y) in self.node_x.iter().zip(&self.node_y) {
            let _ = writeln!(out, "{x:.16e} {y:.16e}");
        }
        out
    }

    pub fn from_dump(reader: impl BufRead) -> Result<BlockGrid, MeshError> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| MeshError::Parse("empty input".into()))?
            .map_err(|e: io::Error| MeshError::Parse(e.to_string()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| MeshError::Parse(format!("bad header `{header}`")))
            })
            .collect::<Result<_, _>>()?;
        let [ni, nj, ghost_depth] = dims[..] else {
            return Err(MeshError::Parse(format!("bad header `{header}`")));
        };
        let count = (ni + 1 + 2 * ghost_depth) * (nj + 1 + 2 * ghost_depth);
        let mut node_x = Vec::with_capacity(count);
        let mut node_y = Vec::with_capacity(count);
        for line in lines {
            let line = line.map_err(|e| MeshError::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => {
                    node_x.push(x);
                    node_y.push(y);
                }
                _ => return Err(MeshError::Parse(format!("bad node line `{line}`"))),
            }
        }
        if node_x.len() != count {
            return Err(MeshError::Parse(format!(
                "expected {count} nodes, found {}",
                node_x.len()
            )));
        }
        Ok(BlockGrid {
            ni,
            nj,
            ghost_depth,
            node_x,
            node_y,
        })
    }
}

fn check_counts(ni: usize, nj: usize) -> Result<(), MeshError> {
    if ni == 0 || nj == 0 {
        return Err(MeshError::InvalidDimensions(format!(
            "cell counts must be at least 1, got {ni} x {nj}"
        )));
    }
    Ok(())
}

fn check_length(name: &str, v: f64) -> Result<(), MeshError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(MeshError::InvalidDimensions(format!(
            "{name} must be positive, got {v}"
        )));
    }
    Ok(())
}

pub fn build_cartesian_grid(
    ni: usize,
    nj: usize,
    x_extent: f64,
    y_extent: f64,
) -> Result<BlockGrid, MeshError> {
    check_counts(ni, nj)?;
    check_length("x extent", x_extent)?;
    check_length("y extent", y_extent)?;
    let dx = x_extent / ni as f64;
    let dy = y_extent / nj as f64;
    Ok(BlockGrid::from_interior_nodes(ni, nj, |ii, jj| {
        (ii as f64 * dx, jj as f64 * dy)
    }))
}

/// Flat inlet section followed by a single compression ramp.
///
/// The lower boundary follows the ramp, the upper boundary is flat at
/// `height`, and each vertical grid line is sheared linearly between them.
/// Node columns are split between the two sections in proportion to their
/// lengths so the ramp corner always lies on a grid line.
pub fn build_ramp_grid(
    ni: usize,
    nj: usize,
    ramp_angle_deg: f64,
    inlet_length: f64,
    ramp_length: f64,
    height: f64,
) -> Result<BlockGrid, MeshError> {
    check_counts(ni, nj)?;
    check_length("inlet length", inlet_length)?;
    check_length("ramp length", ramp_length)?;
    check_length("height", height)?;
    if !(0.0..45.0).contains(&ramp_angle_deg) {
        return Err(MeshError::InvalidGeometry(format!(
            "ramp angle must lie in [0, 45) degrees, got {ramp_angle_deg}"
        )));
    }
    let rise = ramp_length * ramp_angle_deg.to_radians().tan();
    if rise >= height {
        return Err(MeshError::InvalidGeometry(format!(
            "ramp rises {rise} above the {height} channel height"
        )));
    }
    let total = inlet_length + ramp_length;
    let mut n_inlet = ((ni as f64) * inlet_length / total).round() as usize;
    if ni >= 2 {
        n_inlet = n_inlet.clamp(1, ni - 1);
    }
    let slope = ramp_angle_deg.to_radians().tan();
    Ok(BlockGrid::from_interior_nodes(ni, nj, |ii, jj| {
        let x = if n_inlet == 0 || n_inlet == ni {
            total * ii as f64 / ni as f64
        } else if ii <= n_inlet {
            inlet_length * ii as f64 / n_inlet as f64
        } else {
            inlet_length + ramp_length * (ii - n_inlet) as f64 / (ni - n_inlet) as f64
        };
        let y_low = if x > inlet_length {
            (x - inlet_length) * slope
        } else {
            0.0
        };
        let y = y_low + (height - y_low) * jj as f64 / nj as f64;
        (x, y)
    }))
}

/// Per-cell and per-face metrics over the whole ghost frame (unit depth).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGeometry {
    pub ni: usize,
    pub nj: usize,
    pub ghost_depth: usize,
    /// Cell volumes, `cells_i() * cells_j()` entries.
    pub volume: Vec<f64>,
    pub centroid_x: Vec<f64>,
    pub centroid_y: Vec<f64>,
    /// i-faces, `(cells_i() + 1) * cells_j()` entries.
    pub iface_area: Vec<f64>,
    pub iface_normal: Vec<[f64; 2]>,
    /// j-faces, `cells_i() * (cells_j() + 1)` entries.
    pub jface_area: Vec<f64>,
    pub jface_normal: Vec<[f64; 2]>,
}

impl BlockGeometry {
    pub fn cells_i(&self) -> usize {
        self.ni + 2 * self.ghost_depth
    }

    pub fn cells_j(&self) -> usize {
        self.nj + 2 * self.ghost_depth
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.cells_i() + i
    }

    #[inline]
    pub fn iface(&self, ii: usize, j: usize) -> usize {
        j * (self.cells_i() + 1) + ii
    }

    #[inline]
    pub fn jface(&self, i: usize, jj: usize) -> usize {
        jj * self.cells_i() + i
    }

    /// Sum of outward `n * ds` over the four faces of cell `(i, j)`.
    pub fn closure(&self, i: usize, j: usize) -> [f64; 2] {
        let e = self.iface(i + 1, j);
        let w = self.iface(i, j);
        let n = self.jface(i, j + 1);
        let s = self.jface(i, j);
        let mut acc = [0.0; 2];
        for k in 0..2 {
            acc[k] = self.iface_normal[e][k] * self.iface_area[e]
                - self.iface_normal[w][k] * self.iface_area[w]
                + self.jface_normal[n][k] * self.jface_area[n]
                - self.jface_normal[s][k] * self.jface_area[s];
        }
        acc
    }

    pub fn perimeter(&self, i: usize, j: usize) -> f64 {
        self.iface_area[self.iface(i + 1, j)]
            + self.iface_area[self.iface(i, j)]
            + self.jface_area[self.jface(i, j + 1)]
            + self.jface_area[self.jface(i, j)]
    }

    /// Copy of the ghost-frame columns `start .. start + width + 2g`, i.e. the
    /// geometry of a slab whose interior covers global interior columns
    /// `start .. start + width`.
    pub fn slab(&self, start: usize, width: usize) -> BlockGeometry {
        let g = self.ghost_depth;
        assert!(width >= 1 && start + width <= self.ni, "slab out of range");
        let cols = width + 2 * g;
        let ny = self.cells_j();
        let mut out = BlockGeometry {
            ni: width,
            nj: self.nj,
            ghost_depth: g,
            volume: Vec::with_capacity(cols * ny),
            centroid_x: Vec::with_capacity(cols * ny),
            centroid_y: Vec::with_capacity(cols * ny),
            iface_area: Vec::with_capacity((cols + 1) * ny),
            iface_normal: Vec::with_capacity((cols + 1) * ny),
            jface_area: Vec::with_capacity(cols * (ny + 1)),
            jface_normal: Vec::with_capacity(cols * (ny + 1)),
        };
        for j in 0..ny {
            let c0 = self.cell(start, j);
            out.volume.extend_from_slice(&self.volume[c0..c0 + cols]);
            out.centroid_x
                .extend_from_slice(&self.centroid_x[c0..c0 + cols]);
            out.centroid_y
                .extend_from_slice(&self.centroid_y[c0..c0 + cols]);
            let f0 = self.iface(start, j);
            out.iface_area
                .extend_from_slice(&self.iface_area[f0..f0 + cols + 1]);
            out.iface_normal
                .extend_from_slice(&self.iface_normal[f0..f0 + cols + 1]);
        }
        for jj in 0..=ny {
            let f0 = self.jface(start, jj);
            out.jface_area
                .extend_from_slice(&self.jface_area[f0..f0 + cols]);
            out.jface_normal
                .extend_from_slice(&self.jface_normal[f0..f0 + cols]);
        }
        out
    }
}

fn unit_normal(tx: f64, ty: f64) -> (f64, [f64; 2]) {
    let len = tx.hypot(ty);
    (len, [tx / len, ty / len])
}

pub fn compute_metrics(grid: &BlockGrid) -> Result<BlockGeometry, MeshError> {
    let g = grid.ghost_depth;
    if g < GHOST_DEPTH {
        return Err(MeshError::InvalidDimensions(format!(
            "ghost depth {g} below the required {GHOST_DEPTH}"
        )));
    }
    let nx = grid.ni + 2 * g;
    let ny = grid.nj + 2 * g;
    if grid.node_x.len() != (nx + 1) * (ny + 1) || grid.node_y.len() != grid.node_x.len() {
        return Err(MeshError::InvalidDimensions(
            "node array size mismatch".into(),
        ));
    }
    let mut volume = Vec::with_capacity(nx * ny);
    let mut centroid_x = Vec::with_capacity(nx * ny);
    let mut centroid_y = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x1, y1) = grid.node(i, j);
            let (x2, y2) = grid.node(i + 1, j);
            let (x3, y3) = grid.node(i + 1, j + 1);
            let (x4, y4) = grid.node(i, j + 1);
            // Shoelace on the diagonals of a counter-clockwise quadrilateral.
            let vol = 0.5 * ((x3 - x1) * (y4 - y2) - (x4 - x2) * (y3 - y1));
            if !(vol > 0.0) {
                return Err(MeshError::NonPositiveVolume { i, j, volume: vol });
            }
            volume.push(vol);
            centroid_x.push(0.25 * (x1 + x2 + x3 + x4));
            centroid_y.push(0.25 * (y1 + y2 + y3 + y4));
        }
    }
    let mut iface_area = Vec::with_capacity((nx + 1) * ny);
    let mut iface_normal = Vec::with_capacity((nx + 1) * ny);
    for j in 0..ny {
        for ii in 0..=nx {
            let (xa, ya) = grid.node(ii, j);
            let (xb, yb) = grid.node(ii, j + 1);
            // Tangent rotated by -90 degrees points towards increasing i.
            let (len, n) = unit_normal(yb - ya, -(xb - xa));
            iface_area.push(len);
            iface_normal.push(n);
        }
    }
    let mut jface_area = Vec::with_capacity(nx * (ny + 1));
    let mut jface_normal = Vec::with_capacity(nx * (ny + 1));
    for jj in 0..=ny {
        for i in 0..nx {
            let (xa, ya) = grid.node(i, jj);
            let (xb, yb) = grid.node(i + 1, jj);
            let (len, n) = unit_normal(-(yb - ya), xb - xa);
            jface_area.push(len);
            jface_normal.push(n);
        }
    }
    Ok(BlockGeometry {
        ni: grid.ni,
        nj: grid.nj,
        ghost_depth: g,
        volume,
        centroid_x,
        centroid_y,
        iface_area,
        iface_normal,
        jface_area,
        jface_normal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn interior_node(grid: &BlockGrid, ii: usize, jj: usize) -> (f64, f64) {
        grid.node(ii + grid.ghost_depth, jj + grid.ghost_depth)
    }

    fn assert_metric_invariants(geo: &BlockGeometry) {
        for j in 0..geo.cells_j() {
            for i in 0..geo.cells_i() {
                assert!(geo.volume[geo.cell(i, j)] > 0.0);
                let c = geo.closure(i, j);
                let scale = geo.perimeter(i, j);
                assert!(
                    c[0].abs() <= 1e-12 * scale && c[1].abs() <= 1e-12 * scale,
                    "cell ({i},{j}) closure {c:?}"
                );
            }
        }
        for n in geo.iface_normal.iter().chain(&geo.jface_normal) {
            assert!((n[0].hypot(n[1]) - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn cartesian_nodes_are_uniform() {
        let grid = build_cartesian_grid(2, 2, 1.0, 1.0).unwrap();
        for jj in 0..=2 {
            for ii in 0..=2 {
                assert_eq!(
                    interior_node(&grid, ii, jj),
                    (0.5 * ii as f64, 0.5 * jj as f64)
                );
            }
        }
        // ghost nodes continue the spacing
        assert_eq!(grid.node(0, 0), (-1.0, -1.0));
        assert_eq!(grid.node(6, 6), (2.0, 2.0));
    }

    #[test]
    fn single_unit_cell() {
        let grid = build_cartesian_grid(1, 1, 1.0, 1.0).unwrap();
        let geo = compute_metrics(&grid).unwrap();
        let c = geo.cell(2, 2);
        assert_eq!(geo.volume[c], 1.0);
        assert_eq!(geo.iface_area[geo.iface(2, 2)], 1.0);
        assert_eq!(geo.iface_normal[geo.iface(3, 2)], [1.0, 0.0]);
        assert_eq!(geo.jface_normal[geo.jface(2, 3)], [0.0, 1.0]);
        // outward normals of the west and south faces are the negated face normals
        assert_eq!(geo.iface_normal[geo.iface(2, 2)], [1.0, 0.0]);
        assert_eq!(geo.jface_normal[geo.jface(2, 2)], [0.0, 1.0]);
        assert_eq!(geo.jface_area[geo.jface(2, 3)], 1.0);
    }

    #[test]
    fn rectangular_spacing() {
        let grid = build_cartesian_grid(4, 2, 2.0, 1.0).unwrap();
        assert_eq!(
            interior_node(&grid, 1, 0).0 - interior_node(&grid, 0, 0).0,
            0.5
        );
        assert_eq!(
            interior_node(&grid, 0, 1).1 - interior_node(&grid, 0, 0).1,
            0.5
        );
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(build_cartesian_grid(0, 2, 1.0, 1.0).is_err());
        assert!(build_cartesian_grid(2, 2, -1.0, 1.0).is_err());
        assert!(build_cartesian_grid(2, 2, 1.0, 0.0).is_err());
        assert!(build_ramp_grid(10, 10, 45.0, 1.0, 2.0, 1.5).is_err());
        assert!(build_ramp_grid(10, 10, 60.0, 1.0, 2.0, 1.5).is_err());
        assert!(build_ramp_grid(10, 10, 40.0, 1.0, 2.0, 1.5).is_err()); // ramp pokes through the top
    }

    #[test]
    fn skewed_quad_volume() {
        let mut grid = build_cartesian_grid(1, 1, 1.0, 1.0).unwrap();
        let k = grid.node_index(3, 3);
        grid.node_x[k] = 1.2;
        let geo = compute_metrics(&grid).unwrap();
        assert!((geo.volume[geo.cell(2, 2)] - 1.1).abs() < 1e-15);
        let c = geo.closure(2, 2);
        assert!(c[0].abs() < 1e-15 && c[1].abs() < 1e-15);
    }

    #[test]
    fn tangled_cell_reported_with_index() {
        let mut grid = build_cartesian_grid(2, 2, 1.0, 1.0).unwrap();
        let k = grid.node_index(3, 3);
        grid.node_x[k] = 5.0;
        match compute_metrics(&grid) {
            Err(MeshError::NonPositiveVolume { i, j, .. }) => assert!(i <= 3 && j <= 3),
            other => panic!("expected volume error, got {other:?}"),
        }
    }

    #[test]
    fn flat_ramp_matches_cartesian() {
        let ramp = build_ramp_grid(12, 5, 0.0, 1.0, 2.0, 1.5).unwrap();
        let cart = build_cartesian_grid(12, 5, 3.0, 1.5).unwrap();
        for (a, b) in ramp.node_x.iter().zip(&cart.node_x) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in ramp.node_y.iter().zip(&cart.node_y) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn ramp_grids_have_valid_metrics() {
        for angle in [10.0, 30.0] {
            let grid = build_ramp_grid(40, 20, angle, 1.0, 2.0, 1.5).unwrap();
            let geo = compute_metrics(&grid).unwrap();
            assert_metric_invariants(&geo);
            let min = geo.volume.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0);
        }
    }

    #[test]
    fn refinement_quarters_cartesian_volumes() {
        let coarse = compute_metrics(&build_cartesian_grid(6, 4, 3.0, 1.0).unwrap()).unwrap();
        let fine = compute_metrics(&build_cartesian_grid(12, 8, 3.0, 1.0).unwrap()).unwrap();
        let vc = coarse.volume[coarse.cell(2, 2)];
        for j in 2..10 {
            for i in 2..14 {
                assert_eq!(fine.volume[fine.cell(i, j)], 0.25 * vc);
            }
        }
    }

    #[test]
    fn slab_matches_global_columns() {
        let geo = compute_metrics(&build_ramp_grid(10, 4, 20.0, 1.0, 2.0, 1.5).unwrap()).unwrap();
        let s = geo.slab(3, 4);
        for j in 0..s.cells_j() {
            for i in 0..s.cells_i() {
                assert_eq!(s.volume[s.cell(i, j)], geo.volume[geo.cell(i + 3, j)]);
            }
            for ii in 0..=s.cells_i() {
                assert_eq!(
                    s.iface_normal[s.iface(ii, j)],
                    geo.iface_normal[geo.iface(ii + 3, j)]
                );
            }
        }
        for jj in 0..=s.cells_j() {
            for i in 0..s.cells_i() {
                assert_eq!(
                    s.jface_area[s.jface(i, jj)],
                    geo.jface_area[geo.jface(i + 3, jj)]
                );
            }
        }
    }

    #[test]
    fn dump_round_trip() {
        let grid = build_ramp_grid(7, 3, 30.0, 1.0, 2.0, 1.5).unwrap();
        let text = grid.to_dump();
        assert!(text.starts_with("7 3 2\n"));
        let back = BlockGrid::from_dump(text.as_bytes()).unwrap();
        assert_eq!(back, grid);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_ramps_close_every_cell(
            ni in 1usize..30, nj in 1usize..15,
            angle in 0.0f64..35.0,
            inlet in 0.2f64..3.0, ramp in 0.2f64..3.0,
        ) {
            // the ghost columns extend the ramp by up to two ramp-cell widths
            let height = 3.0 * ramp * angle.to_radians().tan() + 0.5;
            let grid = build_ramp_grid(ni, nj, angle, inlet, ramp, height).unwrap();
            let geo = compute_metrics(&grid).unwrap();
            assert_metric_invariants(&geo);
        }
    }
}
