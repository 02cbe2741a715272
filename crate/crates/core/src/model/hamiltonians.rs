use super::{ModelParams, NonlinearCoeffs};
use crate::fock::{ladder, FockBasis, Frequency, LadderKind, ModeId, SparseOperator, Waveguide};
use crate::{Result, C64};

fn a(basis: &FockBasis, m: ModeId) -> Result<SparseOperator> {
    ladder(basis, m, LadderKind::Annihilate)
}

fn ad(basis: &FockBasis, m: ModeId) -> Result<SparseOperator> {
    ladder(basis, m, LadderKind::Create)
}

fn require_pair_modes(basis: &FockBasis) -> Result<()> {
    for m in ModeId::waveguide_modes() {
        basis.mode_index(m)?;
    }
    Ok(())
}

/// c·x†y† + c*·x y
fn pair_term(basis: &FockBasis, x: ModeId, y: ModeId, c: C64) -> Result<SparseOperator> {
    let create = &(&ad(basis, x)? * &ad(basis, y)?) * c;
    let annihilate = &(&a(basis, x)? * &a(basis, y)?) * c.conj();
    Ok(&create + &annihilate)
}

/// gε(e^{iθ} a_s†a_i† + h.c.) + gε(b_s†b_i† + h.c.)
pub fn build_h_nl(params: &ModelParams, basis: &FockBasis) -> Result<SparseOperator> {
    require_pair_modes(basis)?;
    let ga = C64::from_polar(params.g_eps, params.theta());
    let gb = C64::new(params.g_eps, 0.0);
    Ok(&pair_term(basis, ModeId::AS, ModeId::AI, ga)? + &pair_term(basis, ModeId::BS, ModeId::BI, gb)?)
}

/// −iΓ Σ_μ (a_μ + b_μ)†(a_μ + b_μ)
pub fn build_h_linear_eff(params: &ModelParams, basis: &FockBasis) -> Result<SparseOperator> {
    require_pair_modes(basis)?;
    let mut h = SparseOperator::zeros(basis.dim());
    for freq in [Frequency::Signal, Frequency::Idler] {
        let am = ModeId::new(Waveguide::A, freq);
        let bm = ModeId::new(Waveguide::B, freq);
        let s = &a(basis, am)? + &a(basis, bm)?;
        h = &h + &(&s.adjoint() * &s);
    }
    Ok(&h * C64::new(0.0, -params.gamma))
}

/// Non-Hermitian Hamiltonian H_NL + H_L'.
pub fn build_h_eff(params: &ModelParams, basis: &FockBasis) -> Result<SparseOperator> {
    Ok(&build_h_nl(params, basis)? + &build_h_linear_eff(params, basis)?)
}

/// H_NL + Γ Σ_μ (a_μ†b_μ + a_μ b_μ†)
pub fn build_h_coherent(params: &ModelParams, basis: &FockBasis) -> Result<SparseOperator> {
    let mut h = build_h_nl(params, basis)?;
    for freq in [Frequency::Signal, Frequency::Idler] {
        let am = ModeId::new(Waveguide::A, freq);
        let bm = ModeId::new(Waveguide::B, freq);
        let hop = &ad(basis, am)? * &a(basis, bm)?;
        h = &h + &(&(&hop + &hop.adjoint()) * params.gamma);
    }
    Ok(h)
}

/// Pair Hamiltonian in the bright/dark representation (a-slot = B, b-slot = D).
pub fn build_h_nl_bd(params: &ModelParams, basis: &FockBasis) -> Result<SparseOperator> {
    build_h_nl_bd_with(params.coefficients(), basis)
}

/// Λ_co(B_s†B_i† + D_s†D_i†) + Λ_x(B_s†D_i† + D_s†B_i†) + h.c.
pub fn build_h_nl_bd_with(c: NonlinearCoeffs, basis: &FockBasis) -> Result<SparseOperator> {
    require_pair_modes(basis)?;
    let (bs, bi, ds, di) = (ModeId::AS, ModeId::AI, ModeId::BS, ModeId::BI);
    let terms = [
        pair_term(basis, bs, bi, c.lambda_co)?,
        pair_term(basis, ds, di, c.lambda_co)?,
        pair_term(basis, bs, di, c.lambda_x)?,
        pair_term(basis, ds, bi, c.lambda_x)?,
    ];
    Ok(terms.iter().skip(1).fold(terms[0].clone(), |acc, t| &acc + t))
}
