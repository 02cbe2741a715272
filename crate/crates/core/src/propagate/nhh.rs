use nalgebra::DVector;

use super::{resolve_step, substeps, RecordedState, SampleDiagnostics, Trajectory};
use crate::fock::{SparseOperator, StateVector};
use crate::model::{build_h_coherent, build_h_eff, build_liouvillian, ModelParams, Scheme};
use crate::observables::FockObservables;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NhhOptions {
    pub step: Option<f64>,
    /// Divide expectation values by ⟨ψ|ψ⟩. Off by default, so the decay of the
    /// norm shows up in the observables exactly as in the jump-free master equation.
    pub normalize: bool,
    pub record_states: bool,
}

pub fn evolve_nhh(params: &ModelParams, psi0: &StateVector) -> Result<Trajectory> {
    evolve_nhh_with(params, psi0, &NhhOptions::default())
}

/// RK4 integration of d|ψ⟩/dz = −i H |ψ⟩ with H = H_NL + H_L' (H_c for the
/// coherent scheme).
pub fn evolve_nhh_with(params: &ModelParams, psi0: &StateVector, opts: &NhhOptions) -> Result<Trajectory> {
    params.validate()?;
    let basis = psi0.basis().clone();
    if basis.modes() != params.modes().as_slice() {
        return Err(Error::Basis(format!("initial state basis does not match the {:?} scheme", params.scheme)));
    }
    let n0 = psi0.norm_sqr();
    if (n0 - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!("initial state has norm² {n0}")));
    }
    let h = resolve_step(params, opts.step)?;
    let ham: SparseOperator = match params.scheme {
        Scheme::CoherentHermitian => build_h_coherent(params, &basis)?,
        Scheme::ThreeMode => build_liouvillian(params, &basis)?.effective_hamiltonian(),
        Scheme::AntiPtMaster | Scheme::AntiPtNhh => build_h_eff(params, &basis)?,
    };
    let gen = &ham * C64::new(0.0, -1.0);
    let observables = FockObservables::new(&basis)?;

    let mut psi: DVector<C64> = psi0.amplitudes().clone();
    let mut traj = Trajectory {
        scheme: params.scheme,
        params: params.clone(),
        z: params.z_grid.clone(),
        records: Vec::with_capacity(params.z_grid.len()),
        states: Vec::new(),
        diagnostics: Vec::with_capacity(params.z_grid.len()),
        step: 0.0,
    };
    let mut z = 0.0;
    let mut last_norm = n0;
    for (si, &zs) in params.z_grid.iter().enumerate() {
        if si > 0 {
            let n = substeps(zs - z, h);
            let dz = (zs - z) / n as f64;
            traj.step = traj.step.max(dz);
            let half = C64::new(0.5 * dz, 0.0);
            let full = C64::new(dz, 0.0);
            for _ in 0..n {
                let k1 = gen.matvec(&psi);
                let k2 = gen.matvec(&(&psi + &k1 * half));
                let k3 = gen.matvec(&(&psi + &k2 * half));
                let k4 = gen.matvec(&(&psi + &k3 * full));
                psi += (k1 + k4 + (k2 + k3) * C64::new(2.0, 0.0)) * C64::new(dz / 6.0, 0.0);
            }
            z = zs;
        }
        let norm = psi.norm_squared();
        if !norm.is_finite() {
            return Err(Error::numerical(zs, "state became non-finite; reduce the step"));
        }
        if norm > last_norm * (1.0 + 1e-10) {
            return Err(Error::numerical(
                zs,
                format!("norm grew from {last_norm:.15} to {norm:.15}; reduce the step"),
            ));
        }
        last_norm = norm;
        traj.diagnostics.push(SampleDiagnostics { z: zs, trace: norm, hermiticity_defect: 0.0, min_eigenvalue: f64::NAN });
        let scale = if opts.normalize { 1.0 / norm } else { 1.0 };
        traj.records.push(observables.record(zs, params.theta(), |op| op.expectation(&psi) * scale));
        if opts.record_states {
            traj.states.push(RecordedState::Pure(StateVector::new(basis.clone(), psi.clone())?));
        }
    }
    Ok(traj)
}
