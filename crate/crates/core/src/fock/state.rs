use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{FockBasis, ModeId, SparseOperator};
use crate::{Error, Result, C64, ONE};

/// Pure state on a Fock basis. Norm is not forced to one: non-Hermitian
/// evolution lets it decay.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(basis: Arc<FockBasis>, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: amps.len() });
        }
        Ok(StateVector { basis, amps })
    }

    pub fn vacuum(basis: Arc<FockBasis>) -> Self {
        let mut amps = DVector::zeros(basis.dim());
        amps[0] = ONE;
        StateVector { basis, amps }
    }

    /// Fock state with the listed occupations.
    pub fn fock(basis: Arc<FockBasis>, occupied: &[(ModeId, u8)]) -> Result<Self> {
        let i = basis.index_of_modes(occupied)?;
        let mut amps = DVector::zeros(basis.dim());
        amps[i] = ONE;
        Ok(StateVector { basis, amps })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.amps.norm();
        if n == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Ok(StateVector { basis: self.basis.clone(), amps: self.amps.unscale(n) })
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn expectation(&self, op: &SparseOperator) -> Result<C64> {
        check_dim(&self.basis, op)?;
        Ok(op.expectation(&self.amps))
    }

    pub fn apply(&self, op: &SparseOperator) -> Result<StateVector> {
        check_dim(&self.basis, op)?;
        Ok(StateVector { basis: self.basis.clone(), amps: op.matvec(&self.amps) })
    }

    /// |ψ⟩⟨ψ| without renormalization.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix { basis: self.basis.clone(), data: &self.amps * self.amps.adjoint() }
    }
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<FockBasis>,
    data: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(basis: Arc<FockBasis>, data: DMatrix<C64>) -> Result<Self> {
        let d = basis.dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: data.nrows().max(data.ncols()) });
        }
        Ok(DensityMatrix { basis, data })
    }

    pub fn vacuum(basis: Arc<FockBasis>) -> Self {
        StateVector::vacuum(basis).projector()
    }

    pub fn fock(basis: Arc<FockBasis>, occupied: &[(ModeId, u8)]) -> Result<Self> {
        Ok(StateVector::fock(basis, occupied)?.projector())
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// Largest |ρ − ρ†| element.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.data.nrows();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.data)
    }

    pub fn expectation(&self, op: &SparseOperator) -> Result<C64> {
        check_dim(&self.basis, op)?;
        Ok(op.trace_with(&self.data))
    }
}

pub fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn check_dim(basis: &FockBasis, op: &SparseOperator) -> Result<()> {
    if op.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: op.dim() });
    }
    Ok(())
}
