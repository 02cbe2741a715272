use super::{build_h_nl, Collapse, Liouvillian, ModelParams};
use crate::fock::{ladder, FockBasis, Frequency, LadderKind, ModeId, Waveguide};
use crate::{Error, Result};

/// H = H_NL + κ Σ_μ (a_μ†c_μ + b_μ†c_μ + h.c.) with loss 2γ_c D[c_μ].
///
/// Eliminating c gives the collective dissipator 2Γ D[a_μ + b_μ], Γ = κ²/γ_c.
pub fn build_three_mode_model(params: &ModelParams, basis: &FockBasis) -> Result<Liouvillian> {
    let kappa = params.kappa.ok_or_else(|| Error::invalid("three-mode model needs kappa"))?;
    let gamma_c = params.gamma_c.ok_or_else(|| Error::invalid("three-mode model needs gamma_c"))?;
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be nonnegative, got {kappa}")));
    }
    if !(gamma_c > 0.0 && gamma_c.is_finite()) {
        return Err(Error::invalid(format!("gamma_c must be positive, got {gamma_c}")));
    }
    if kappa > 0.0 && gamma_c / kappa < 5.0 {
        log::warn!("gamma_c/kappa = {:.2} < 5: c is not adiabatically slaved", gamma_c / kappa);
    }
    let mut h = build_h_nl(params, basis)?;
    let mut collapses = Vec::new();
    for freq in [Frequency::Signal, Frequency::Idler] {
        let c = ladder(basis, ModeId::new(Waveguide::C, freq), LadderKind::Annihilate)?;
        for g in [Waveguide::A, Waveguide::B] {
            let x = ladder(basis, ModeId::new(g, freq), LadderKind::Create)?;
            let hop = &x * &c;
            h = &h + &(&(&hop + &hop.adjoint()) * kappa);
        }
        collapses.push(Collapse { op: c, rate: 2.0 * gamma_c });
    }
    Ok(Liouvillian { hamiltonian: h, collapses })
}
