use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64, ZERO};

/// Square complex matrix in compressed-row form.
///
/// Entries are kept sorted by (row, col) with no duplicates, so two operators
/// built from the same input are bitwise identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        SparseOperator { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        SparseOperator {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![C64::new(1.0, 0.0); dim],
        }
    }

    /// Builds from (row, col, value) triplets; repeated keys are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut trip: Vec<(usize, usize, C64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = trip.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: r.max(c) + 1 });
        }
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(trip.len());
        for (r, c, v) in trip {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != ZERO);
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = merged.iter().map(|e| e.1).collect();
        let vals = merged.iter().map(|e| e.2).collect();
        Ok(SparseOperator { dim, row_ptr, cols, vals })
    }

    pub fn from_dense(m: &DMatrix<C64>, drop_below: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let mut trip = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v.norm() > drop_below {
                    trip.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), trip)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[lo..hi].iter().copied().zip(self.vals[lo..hi].iter().copied())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        match self.cols[lo..hi].binary_search(&c) {
            Ok(k) => self.vals[lo + k],
            Err(_) => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, trip).expect("transpose keeps indices in range")
    }

    pub fn scale(&self, s: C64) -> Self {
        let trip = self.entries().map(|(r, c, v)| (r, c, v * s)).collect();
        Self::from_triplets(self.dim, trip).expect("scaling keeps indices in range")
    }

    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(x.len(), self.dim, "operator/vector dimension mismatch");
        DVector::from_fn(self.dim, |r, _| self.row(r).map(|(c, v)| v * x[c]).sum())
    }

    /// `self · m` for a dense matrix with `dim` rows.
    pub fn mul_dense(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        assert_eq!(m.nrows(), self.dim, "operator/matrix dimension mismatch");
        let mut out = DMatrix::zeros(self.dim, m.ncols());
        for j in 0..m.ncols() {
            let src = m.column(j);
            let mut dst = out.column_mut(j);
            for r in 0..self.dim {
                let mut acc = ZERO;
                for (c, v) in self.row(r) {
                    acc += v * src[c];
                }
                dst[r] = acc;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// Largest |A − A†| element.
    pub fn hermiticity_defect(&self) -> f64 {
        (self - &self.adjoint()).max_abs()
    }

    /// Largest |A + A†| element.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        (self + &self.adjoint()).max_abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ⟨ψ|A|ψ⟩ without normalizing ψ.
    pub fn expectation(&self, psi: &DVector<C64>) -> C64 {
        let mut acc = ZERO;
        for r in 0..self.dim {
            let mut row = ZERO;
            for (c, v) in self.row(r) {
                row += v * psi[c];
            }
            acc += psi[r].conj() * row;
        }
        acc
    }

    /// Tr(A ρ) for a dense ρ.
    pub fn trace_with(&self, rho: &DMatrix<C64>) -> C64 {
        self.entries().map(|(r, c, v)| v * rho[(c, r)]).sum()
    }
}

impl Mul for &SparseOperator {
    type Output = SparseOperator;

    fn mul(self, rhs: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let mut trip = Vec::new();
        let mut acc = vec![ZERO; self.dim];
        let mut touched = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if acc[c] == ZERO {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            for &c in &touched {
                trip.push((r, c, acc[c]));
                acc[c] = ZERO;
            }
            touched.clear();
        }
        SparseOperator::from_triplets(self.dim, trip).expect("product keeps indices in range")
    }
}

impl Add for &SparseOperator {
    type Output = SparseOperator;

    fn add(self, rhs: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let trip = self.entries().chain(rhs.entries()).collect();
        SparseOperator::from_triplets(self.dim, trip).expect("sum keeps indices in range")
    }
}

impl Sub for &SparseOperator {
    type Output = SparseOperator;

    fn sub(self, rhs: &SparseOperator) -> SparseOperator {
        self + &(-rhs)
    }
}

impl Neg for &SparseOperator {
    type Output = SparseOperator;

    fn neg(self) -> SparseOperator {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul<C64> for &SparseOperator {
    type Output = SparseOperator;

    fn mul(self, s: C64) -> SparseOperator {
        self.scale(s)
    }
}

impl Mul<f64> for &SparseOperator {
    type Output = SparseOperator;

    fn mul(self, s: f64) -> SparseOperator {
        self.scale(C64::new(s, 0.0))
    }
}
