//! Gaussian-state engine: closed-form Bogoliubov transfer matrices with their
//! vacuum-noise contributions, a general-θ second-moment ODE, and Wick
//! evaluation of higher-order normally ordered moments.

pub mod closed_form;
mod moments;
pub mod quad;
mod transfer;
mod wick;

pub use moments::{moment_ode, moment_ode_with_step};
pub use transfer::{
    noise_commutator, transfer_antipt, transfer_coherent_pi, transfer_coherent_theta0, NoiseFamily, NoiseKernels,
    PhaseCase,
};
pub use wick::{g4_from_covariance, wick_moment};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::fock::ModeId;
use crate::observables::{MomentSource, OpSpec};
use crate::{Error, Result, C64};

/// Order of modes in the covariance blocks.
pub const COV_MODES: [ModeId; 4] = [ModeId::AS, ModeId::BS, ModeId::AI, ModeId::BI];

pub fn cov_index(mode: ModeId) -> Result<usize> {
    COV_MODES.iter().position(|&m| m == mode).ok_or(Error::UnknownMode(mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Coherent pair at θ = 0.
    M1,
    /// Coherent pair at θ = π.
    M2,
    /// Anti-PT pair at θ = 0.
    M3,
    /// Anti-PT pair at θ = π.
    M4,
    Numeric,
}

/// Propagator of V = [a_s, b_s, a_i†, b_i†]: V(z) = m V(0) (+ noise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m: Matrix4<C64>,
    pub z: f64,
    pub family: Family,
}

fn eta() -> Matrix4<C64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0).map(|x| C64::new(x, 0.0)))
}

impl TransferMatrix {
    /// max |m η m† − η|
    pub fn bogoliubov_defect(&self) -> f64 {
        let e = eta();
        (self.m * e * self.m.adjoint() - e).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// m η m†, the deterministic part of ⟨[V_r, V_t†]⟩.
    pub fn commutator_matrix(&self) -> Matrix4<C64> {
        self.m * eta() * self.m.adjoint()
    }

    /// Second moments of m V(0) with the system starting in vacuum.
    pub fn vacuum_covariance(&self) -> CovarianceState {
        // Each mode is Σ_k A_k c_k + B_k c_k† over initial annihilators c = (a_s, b_s, a_i, b_i).
        let mut a = Matrix4::<C64>::zeros();
        let mut b = Matrix4::<C64>::zeros();
        for r in 0..2 {
            for k in 0..2 {
                a[(r, k)] = self.m[(r, k)];
                b[(r, k + 2)] = self.m[(r, k + 2)];
            }
        }
        for r in 2..4 {
            for k in 0..2 {
                b[(r, k)] = self.m[(r, k)].conj();
                a[(r, k + 2)] = self.m[(r, k + 2)].conj();
            }
        }
        CovarianceState { n_block: b.conjugate() * b.transpose(), m_block: a * b.transpose(), z: self.z }
    }
}

/// Zero-mean Gaussian state: N_ij = ⟨v_i† v_j⟩, M_ij = ⟨v_i v_j⟩ over [`COV_MODES`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState {
    pub n_block: Matrix4<C64>,
    pub m_block: Matrix4<C64>,
    pub z: f64,
}

impl CovarianceState {
    pub fn vacuum(z: f64) -> Self {
        CovarianceState { n_block: Matrix4::zeros(), m_block: Matrix4::zeros(), z }
    }

    /// Moments of the sum of two independent zero-mean contributions.
    pub fn plus(&self, other: &CovarianceState) -> Self {
        CovarianceState { n_block: self.n_block + other.n_block, m_block: self.m_block + other.m_block, z: self.z }
    }

    pub fn mean_photons(&self, mode: ModeId) -> Result<f64> {
        let k = cov_index(mode)?;
        Ok(self.n_block[(k, k)].re)
    }

    pub fn n_hermiticity_defect(&self) -> f64 {
        (self.n_block - self.n_block.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn m_symmetry_defect(&self) -> f64 {
        (self.m_block - self.m_block.transpose()).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn n_min_eigenvalue(&self) -> f64 {
        let h = (self.n_block + self.n_block.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl MomentSource for CovarianceState {
    fn normally_ordered_moment(&self, ops: &OpSpec) -> Result<C64> {
        wick_moment(self, ops)
    }
}
