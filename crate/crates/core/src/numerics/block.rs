use crate::mesh::GHOST_DEPTH;
use crate::state::{conserved_from_primitive, Conserved, GasModel, Primitive};

/// Conserved cell values of one block, ghost frame included.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    pub ni: usize,
    pub nj: usize,
    pub ghost_depth: usize,
    pub cells: Vec<Conserved>,
}

impl BlockState {
    pub fn uniform(ni: usize, nj: usize, value: Conserved) -> Self {
        let g = GHOST_DEPTH;
        Self {
            ni,
            nj,
            ghost_depth: g,
            cells: vec![value; (ni + 2 * g) * (nj + 2 * g)],
        }
    }

    pub fn from_primitive(ni: usize, nj: usize, value: Primitive, gas: &GasModel) -> Self {
        Self::uniform(ni, nj, conserved_from_primitive(value, gas))
    }

    pub fn cells_i(&self) -> usize {
        self.ni + 2 * self.ghost_depth
    }

    pub fn cells_j(&self) -> usize {
        self.nj + 2 * self.ghost_depth
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cells_i() + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Conserved {
        self.cells[self.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Conserved) {
        let k = self.index(i, j);
        self.cells[k] = value;
    }

    /// Interior values, row-major (`i` fastest), `ni * nj` entries.
    pub fn interior(&self) -> Vec<Conserved> {
        let g = self.ghost_depth;
        let mut out = Vec::with_capacity(self.ni * self.nj);
        for j in g..g + self.nj {
            let k = self.index(g, j);
            out.extend_from_slice(&self.cells[k..k + self.ni]);
        }
        out
    }

    pub fn set_interior(&mut self, values: &[Conserved]) {
        assert_eq!(values.len(), self.ni * self.nj, "interior size mismatch");
        let g = self.ghost_depth;
        for (row, j) in (g..g + self.nj).enumerate() {
            let k = self.index(g, j);
            self.cells[k..k + self.ni].copy_from_slice(&values[row * self.ni..(row + 1) * self.ni]);
        }
    }
}
