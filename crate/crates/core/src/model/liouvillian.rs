use nalgebra::{DMatrix, DVector};

use super::{build_h_coherent, build_h_eff, build_h_nl, build_three_mode_model, ModelParams, Scheme};
use crate::fock::{ladder, DensityMatrix, FockBasis, Frequency, LadderKind, ModeId, SparseOperator, StateVector, Waveguide};
use crate::{Error, Result, C64};

/// Collapse operator entering as `rate · D[op]`, D[O]ρ = OρO† − ½{O†O, ρ}.
#[derive(Debug, Clone)]
pub struct Collapse {
    pub op: SparseOperator,
    pub rate: f64,
}

/// dρ/dz = −i[H, ρ] + Σ_k rate_k D[L_k]ρ
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub hamiltonian: SparseOperator,
    pub collapses: Vec<Collapse>,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// H − (i/2) Σ rate L†L
    pub fn effective_hamiltonian(&self) -> SparseOperator {
        let mut h = self.hamiltonian.clone();
        for c in &self.collapses {
            let ll = &c.op.adjoint() * &c.op;
            h = &h + &(&ll * C64::new(0.0, -0.5 * c.rate));
        }
        h
    }

    /// −i(H_eff ρ − ρ H_eff†)
    pub fn no_jump_part(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let heff = self.effective_hamiltonian();
        let x = heff.mul_dense(rho);
        let y = heff.mul_dense(&rho.adjoint()).adjoint();
        (x - y) * C64::new(0.0, -1.0)
    }

    /// Σ rate L ρ L†
    pub fn jump_part(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
        for c in &self.collapses {
            let lr = c.op.mul_dense(rho);
            out += c.op.mul_dense(&lr.adjoint()).adjoint() * C64::new(c.rate, 0.0);
        }
        out
    }

    pub fn rhs(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        self.no_jump_part(rho) + self.jump_part(rho)
    }
}

/// Generator for the scheme in `params`. The NHH scheme shares the master
/// equation's Liouvillian; only the propagator drops its jump part.
pub fn build_liouvillian(params: &ModelParams, basis: &FockBasis) -> Result<Liouvillian> {
    match params.scheme {
        Scheme::AntiPtMaster | Scheme::AntiPtNhh => {
            let mut collapses = Vec::new();
            for freq in [Frequency::Signal, Frequency::Idler] {
                let a = ladder(basis, ModeId::new(Waveguide::A, freq), LadderKind::Annihilate)?;
                let b = ladder(basis, ModeId::new(Waveguide::B, freq), LadderKind::Annihilate)?;
                collapses.push(Collapse { op: &a + &b, rate: 2.0 * params.gamma });
            }
            Ok(Liouvillian { hamiltonian: build_h_nl(params, basis)?, collapses })
        }
        Scheme::CoherentHermitian => {
            Ok(Liouvillian { hamiltonian: build_h_coherent(params, basis)?, collapses: Vec::new() })
        }
        Scheme::ThreeMode => build_three_mode_model(params, basis),
    }
}

fn check_basis(params: &ModelParams, basis: &FockBasis) -> Result<()> {
    let want = params.modes();
    if basis.modes() != want.as_slice() {
        return Err(Error::Basis(format!(
            "basis modes {:?} do not match the {:?} scheme",
            basis.modes().iter().map(|m| m.label()).collect::<Vec<_>>(),
            params.scheme
        )));
    }
    Ok(())
}

/// Full right-hand side of the master equation for the configured scheme.
pub fn lindblad_rhs(params: &ModelParams, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
    check_basis(params, rho.basis())?;
    Ok(build_liouvillian(params, rho.basis())?.rhs(rho.matrix()))
}

/// The recycling term Σ rate L ρ L† alone.
pub fn jump_term(params: &ModelParams, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
    check_basis(params, rho.basis())?;
    Ok(build_liouvillian(params, rho.basis())?.jump_part(rho.matrix()))
}

/// −i H_eff ψ for the anti-PT pair (or −i H_c ψ for the coherent scheme).
pub fn nhh_rhs(params: &ModelParams, psi: &StateVector) -> Result<DVector<C64>> {
    check_basis(params, psi.basis())?;
    let h = match params.scheme {
        Scheme::CoherentHermitian => build_h_coherent(params, psi.basis())?,
        Scheme::ThreeMode => build_liouvillian(params, psi.basis())?.effective_hamiltonian(),
        _ => build_h_eff(params, psi.basis())?,
    };
    Ok(h.matvec(psi.amplitudes()) * C64::new(0.0, -1.0))
}
