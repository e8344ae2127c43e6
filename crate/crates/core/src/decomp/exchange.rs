//! Ghost strips: full-height columns (corner ghosts included) copied by
//! value from the slab that owns them into a neighbour's ghost frame.
//!
//! A slab narrower than the ghost depth cannot supply a whole strip, so each
//! ghost column is fetched from whichever slab owns it.

use std::ops::Range;

use crate::numerics::{BlockState, Edge};
use crate::state::Conserved;

use super::partition::Partition;

/// One message of the exchange plan: global ghost-frame `columns` owned by
/// `from` that fill ghost columns on `edge` of `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub edge: Edge,
    pub columns: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhostStrip {
    pub from: usize,
    /// Edge of the receiving block that the strip fills.
    pub edge: Edge,
    /// Substage counter the data belongs to.
    pub epoch: u64,
    /// Global ghost-frame columns carried.
    pub columns: Range<usize>,
    /// Each column `cells_j` tall, left column first.
    pub cells: Vec<Conserved>,
}

/// Global ghost-frame columns whose values slab `k` holds authoritatively:
/// its interior, plus the physical ghost columns at either end of the grid.
fn owned(partition: &Partition, k: usize, g: usize) -> Range<usize> {
    let s = &partition.slabs[k];
    let lo = if k == 0 { 0 } else { s.start + g };
    let hi = if k + 1 == partition.len() { s.start + s.width + 2 * g } else { s.start + s.width + g };
    lo..hi
}

/// Every transfer needed to fill all connected ghost columns.
pub fn exchange_plan(partition: &Partition, g: usize) -> Vec<Transfer> {
    let n = partition.len();
    let mut plan = Vec::new();
    for (m, s) in partition.slabs.iter().enumerate() {
        let mut sides = Vec::new();
        if m > 0 {
            sides.push((Edge::Left, s.start..s.start + g));
        }
        if m + 1 < n {
            sides.push((Edge::Right, s.start + s.width + g..s.start + s.width + 2 * g));
        }
        for (edge, ghost) in sides {
            for k in (0..n).filter(|&k| k != m) {
                let own = owned(partition, k, g);
                let lo = own.start.max(ghost.start);
                let hi = own.end.min(ghost.end);
                if lo < hi {
                    plan.push(Transfer {
                        from: k,
                        to: m,
                        edge,
                        columns: lo..hi,
                    });
                }
            }
        }
    }
    plan
}

/// Copy the columns of `t` out of the sender's block; the sender's slab
/// starts at global interior column `start`.
pub fn pack_strip(state: &BlockState, t: &Transfer, start: usize, epoch: u64) -> GhostStrip {
    let ny = state.cells_j();
    let mut cells = Vec::with_capacity(t.columns.len() * ny);
    for c in t.columns.clone() {
        for j in 0..ny {
            cells.push(state.get(c - start, j));
        }
    }
    GhostStrip {
        from: t.from,
        edge: t.edge,
        epoch,
        columns: t.columns.clone(),
        cells,
    }
}

/// Write a received strip into the receiver's ghost frame.
pub fn unpack_strip(state: &mut BlockState, strip: &GhostStrip, start: usize) {
    let ny = state.cells_j();
    assert_eq!(strip.cells.len(), strip.columns.len() * ny, "ghost strip size mismatch");
    for (n, c) in strip.columns.clone().enumerate() {
        for j in 0..ny {
            state.set(c - start, j, strip.cells[n * ny + j]);
        }
    }
}

/// In-place exchange across every cut of `partition`; `blocks[k]` belongs
/// to slab `k`. Returns the number of strips moved.
pub fn exchange_ghosts(partition: &Partition, blocks: &mut [BlockState], epoch: u64) -> usize {
    assert_eq!(partition.len(), blocks.len());
    let Some(first) = blocks.first() else { return 0 };
    let plan = exchange_plan(partition, first.ghost_depth);
    let strips: Vec<(usize, GhostStrip)> = plan
        .iter()
        .map(|t| (t.to, pack_strip(&blocks[t.from], t, partition.slabs[t.from].start, epoch)))
        .collect();
    for (to, strip) in &strips {
        unpack_strip(&mut blocks[*to], strip, partition.slabs[*to].start);
    }
    strips.len()
}

/// Scatter a global field (ghost frame included) into slab blocks.
pub fn scatter(global: &BlockState, partition: &Partition) -> Vec<BlockState> {
    let g = global.ghost_depth;
    partition
        .slabs
        .iter()
        .map(|s| {
            let mut b = BlockState::uniform(s.width, global.nj, Conserved::ZERO);
            for j in 0..global.cells_j() {
                for i in 0..s.width + 2 * g {
                    b.set(i, j, global.get(s.start + i, j));
                }
            }
            b
        })
        .collect()
}

/// Gather slab interiors into a global interior, row-major.
pub fn gather_interior(blocks: &[BlockState], partition: &Partition) -> Vec<Conserved> {
    let nj = blocks.first().map(|b| b.nj).unwrap_or(0);
    let n_l = partition.n_l();
    let mut out = vec![Conserved::ZERO; n_l * nj];
    for (b, s) in blocks.iter().zip(&partition.slabs) {
        let local = b.interior();
        for j in 0..nj {
            out[j * n_l + s.start..j * n_l + s.start + s.width]
                .copy_from_slice(&local[j * s.width..(j + 1) * s.width]);
        }
    }
    out
}
