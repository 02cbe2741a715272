use nalgebra::DMatrix;

use super::{FockBasis, Frequency, SparseOperator};
use crate::{C64, ZERO};

/// Partition of a basis into blocks of fixed signal-minus-idler photon number.
///
/// Every generator in the models conserves this charge, and the jump operators
/// shift ket and bra charge together, so density matrices that start
/// block-diagonal stay block-diagonal.
#[derive(Debug, Clone)]
pub struct SectorLayout {
    blocks: Vec<Vec<usize>>,
    charges: Vec<i32>,
    locate: Vec<(usize, usize)>,
}

impl SectorLayout {
    pub fn by_charge(basis: &FockBasis) -> Self {
        let signal: Vec<bool> = basis.modes().iter().map(|m| m.freq == Frequency::Signal).collect();
        let charge = |i: usize| -> i32 {
            basis
                .occupation(i)
                .iter()
                .zip(&signal)
                .map(|(&n, &s)| if s { n as i32 } else { -(n as i32) })
                .sum()
        };
        let mut charges: Vec<i32> = (0..basis.dim()).map(charge).collect();
        charges.sort_unstable();
        charges.dedup();
        let mut blocks = vec![Vec::new(); charges.len()];
        let mut locate = vec![(0, 0); basis.dim()];
        for i in 0..basis.dim() {
            let b = charges.binary_search(&charge(i)).unwrap();
            locate[i] = (b, blocks[b].len());
            blocks[b].push(i);
        }
        SectorLayout { blocks, charges, locate }
    }

    /// A single block spanning the whole basis.
    pub fn single(dim: usize) -> Self {
        SectorLayout {
            blocks: vec![(0..dim).collect()],
            charges: vec![0],
            locate: (0..dim).map(|i| (0, i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn charge(&self, b: usize) -> i32 {
        self.charges[b]
    }

    pub fn locate(&self, global: usize) -> (usize, usize) {
        self.locate[global]
    }

    pub fn dim(&self) -> usize {
        self.locate.len()
    }

    /// True if `m` has no weight outside the diagonal blocks (within `tol`).
    pub fn is_block_diagonal(&self, m: &DMatrix<C64>, tol: f64) -> bool {
        let d = m.nrows();
        (0..d).all(|r| (0..d).all(|c| self.locate[r].0 == self.locate[c].0 || m[(r, c)].norm() <= tol))
    }

    pub fn split(&self, m: &DMatrix<C64>) -> Vec<DMatrix<C64>> {
        self.blocks
            .iter()
            .map(|idx| DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]))
            .collect()
    }

    pub fn assemble(&self, blocks: &[DMatrix<C64>]) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (idx, blk) in self.blocks.iter().zip(blocks) {
            for (c, &gc) in idx.iter().enumerate() {
                for (r, &gr) in idx.iter().enumerate() {
                    m[(gr, gc)] = blk[(r, c)];
                }
            }
        }
        m
    }

    /// Pieces of `op` mapping block `src` into block `dst`; empty pieces are skipped.
    pub fn restrict(&self, op: &SparseOperator) -> Vec<BlockOperator> {
        let mut pieces: Vec<BlockOperator> = Vec::new();
        let mut trip: Vec<Vec<(usize, usize, C64)>> = Vec::new();
        let mut keys: Vec<(usize, usize)> = Vec::new();
        for (r, c, v) in op.entries() {
            let (br, lr) = self.locate[r];
            let (bc, lc) = self.locate[c];
            let k = match keys.iter().position(|&k| k == (br, bc)) {
                Some(k) => k,
                None => {
                    keys.push((br, bc));
                    trip.push(Vec::new());
                    keys.len() - 1
                }
            };
            trip[k].push((lr, lc, v));
        }
        for ((dst, src), t) in keys.into_iter().zip(trip) {
            pieces.push(BlockOperator::new(dst, src, self.blocks[dst].len(), self.blocks[src].len(), t));
        }
        pieces.sort_by_key(|p| (p.dst, p.src));
        pieces
    }
}

/// Rectangular sparse matrix between two blocks of a [`SectorLayout`].
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub dst: usize,
    pub src: usize,
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl BlockOperator {
    fn new(dst: usize, src: usize, rows: usize, cols: usize, mut trip: Vec<(usize, usize, C64)>) -> Self {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _, _) in &trip {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        BlockOperator {
            dst,
            src,
            rows,
            cols,
            row_ptr,
            col_idx: trip.iter().map(|t| t.1).collect(),
            vals: trip.iter().map(|t| t.2).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `self · m`.
    pub fn mul_dense(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.rows, m.ncols());
        self.mul_dense_into(m, &mut out);
        out
    }

    /// Overwrites `out` with `self · m`.
    pub fn mul_dense_into(&self, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        debug_assert_eq!(m.nrows(), self.cols);
        for j in 0..m.ncols() {
            let src = m.column(j);
            let src = src.as_slice();
            let mut dst = out.column_mut(j);
            for r in 0..self.rows {
                let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
                let mut acc = ZERO;
                for k in lo..hi {
                    acc += self.vals[k] * src[self.col_idx[k]];
                }
                dst[r] = acc;
            }
        }
    }
}
