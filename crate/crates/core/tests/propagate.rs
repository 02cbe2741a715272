use std::sync::Arc;

use antipt_core::fock::{BdDirection, BrightDarkMap, DensityMatrix, FockBasis, ModeId, StateVector};
use antipt_core::gaussian::closed_form::{antipt_theta0_mean_photons_det, antipt_theta0_noise_photons};
use antipt_core::model::{uniform_grid, ModelParams, Scheme, Truncation};
use antipt_core::observables::CorrelationRecord;
use antipt_core::propagate::{
    default_step, evolve_classical, evolve_master, evolve_master_with, evolve_nhh, evolve_nhh_with, MasterOptions,
    NhhOptions, RecordedState,
};
use antipt_core::validation::rel_diff;
use antipt_core::C64;
use approx::assert_abs_diff_eq;

const GAMMA: f64 = 722.0;
const FINE_STEP: f64 = 2.5e-6;

fn idle(scheme: Scheme) -> ModelParams {
    ModelParams::new(0.0, GAMMA, 0.0, scheme)
        .with_truncation(Truncation::total(2))
        .with_z_grid(uniform_grid(4e-3, 21).unwrap())
}

fn bd_state(b: &Arc<FockBasis>, occ: &[(ModeId, u8)]) -> StateVector {
    let s = StateVector::fock(b.clone(), occ).unwrap();
    BrightDarkMap::new(b.clone()).unwrap().apply(&s, BdDirection::ToWaveguide).unwrap()
}

fn fields(r: &CorrelationRecord) -> Vec<f64> {
    let mut v = r.n.to_vec();
    v.extend(r.g2);
    v.extend(r.g3);
    v.push(r.g4);
    v.extend(r.n_bright);
    v.extend(r.n_dark);
    v.push(r.norm);
    v
}

#[test]
fn bright_photon_decays_exponentially() {
    let p = idle(Scheme::AntiPtMaster);
    let b = p.basis().unwrap();
    let rho = bd_state(&b, &[(ModeId::AS, 1)]).projector();
    let opts = MasterOptions { step: Some(FINE_STEP), ..Default::default() };
    let t = evolve_master_with(&p, &rho, &opts).unwrap();
    for (z, r) in t.z.iter().zip(&t.records) {
        let expect = (-4.0 * GAMMA * z).exp();
        assert!(rel_diff(r.n_bright[0], expect) < 1e-8, "{} vs {expect}", r.n_bright[0]);
        assert_abs_diff_eq!(r.norm, 1.0, epsilon = 1e-10);
    }
}

#[test]
fn dark_pair_is_stationary() {
    let p = idle(Scheme::AntiPtMaster);
    let b = p.basis().unwrap();
    let rho = bd_state(&b, &[(ModeId::BS, 1), (ModeId::BI, 1)]).projector();
    let opts = MasterOptions { record_states: true, ..Default::default() };
    let t = evolve_master_with(&p, &rho, &opts).unwrap();
    for s in &t.states {
        let RecordedState::Mixed(m) = s else { panic!("expected a density matrix") };
        assert!((m.matrix() - rho.matrix()).iter().all(|x| x.norm() < 1e-10));
    }
}

#[test]
fn mean_photons_match_the_closed_form() {
    let p = ModelParams::paper();
    let t = evolve_master(&p, &DensityMatrix::vacuum(p.basis().unwrap())).unwrap();
    let l = p.length();
    let expect = antipt_theta0_mean_photons_det(p.g_eps, GAMMA, l) + antipt_theta0_noise_photons(p.g_eps, GAMMA, l);
    for n in t.endpoint().n {
        assert!(rel_diff(n, expect) < 0.01, "n = {n:e}, closed form {expect:e}");
    }
}

#[test]
fn trajectory_starts_at_the_initial_state() {
    let p = ModelParams::paper().with_truncation(Truncation::total(4));
    let t = evolve_master(&p, &DensityMatrix::vacuum(p.basis().unwrap())).unwrap();
    assert_eq!(t.z[0], 0.0);
    assert!(t.z.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(t.records[0].n, [0.0; 4]);
    assert_eq!(t.records.len(), t.z.len());
    for d in &t.diagnostics {
        assert!((d.trace - 1.0).abs() < 1e-8);
        assert!(d.hermiticity_defect < 1e-10);
        assert!(d.min_eigenvalue > -1e-8);
    }
}

#[test]
fn master_rejects_invalid_initial_state() {
    let p = idle(Scheme::AntiPtMaster);
    let b = p.basis().unwrap();
    let rho = DensityMatrix::vacuum(b.clone());
    let doubled = DensityMatrix::new(b, rho.matrix() * C64::new(2.0, 0.0));
    if let Ok(d) = doubled {
        assert!(evolve_master(&p, &d).is_err());
    }
    let opts = MasterOptions { step: Some(-1.0), ..Default::default() };
    assert!(evolve_master_with(&p, &rho, &opts).is_err());
}

#[test]
fn unstable_step_is_reported() {
    let p = ModelParams::paper().with_truncation(Truncation::total(2)).with_z_grid(vec![0.0, 4e-3]);
    let opts = MasterOptions { step: Some(4e-3), ..Default::default() };
    assert!(evolve_master_with(&p, &DensityMatrix::vacuum(p.basis().unwrap()), &opts).is_err());
}

#[test]
fn nhh_vacuum_without_pump_is_constant() {
    let p = idle(Scheme::AntiPtNhh);
    let t = evolve_nhh(&p, &StateVector::vacuum(p.basis().unwrap())).unwrap();
    for r in &t.records {
        assert_abs_diff_eq!(r.norm, 1.0, epsilon = 1e-14);
    }
}

#[test]
fn nhh_bright_amplitude_decays() {
    let p = idle(Scheme::AntiPtNhh);
    let b = p.basis().unwrap();
    let psi = bd_state(&b, &[(ModeId::AS, 1)]);
    let opts = NhhOptions { record_states: true, ..Default::default() };
    let t = evolve_nhh_with(&p, &psi, &opts).unwrap();
    for (z, s) in t.z.iter().zip(&t.states) {
        let RecordedState::Pure(x) = s else { panic!("expected a state vector") };
        let expect = psi.amplitudes() * C64::new((-2.0 * GAMMA * z).exp(), 0.0);
        assert!((x.amplitudes() - expect).norm() < 1e-9);
    }
}

#[test]
fn nhh_norm_is_non_increasing() {
    for theta in [0.0, 1.3, std::f64::consts::PI] {
        let p = ModelParams::paper().with_theta(theta).with_scheme(Scheme::AntiPtNhh);
        let t = evolve_nhh(&p, &StateVector::vacuum(p.basis().unwrap())).unwrap();
        assert!(t.records.windows(2).all(|w| w[1].norm <= w[0].norm + 1e-15));
        assert!(t.endpoint().norm < 1.0);
    }
}

#[test]
fn nhh_rejects_unnormalized_input() {
    let p = idle(Scheme::AntiPtNhh);
    let b = p.basis().unwrap();
    let v = StateVector::vacuum(b.clone()).into_amplitudes() * C64::new(2.0, 0.0);
    assert!(evolve_nhh(&p, &StateVector::new(b, v).unwrap()).is_err());
}

#[test]
fn jump_free_master_equals_nhh() {
    for theta in [0.0, 2.0] {
        let p = ModelParams::paper().with_theta(theta).with_truncation(Truncation::total(4));
        let b = p.basis().unwrap();
        let opts = MasterOptions { include_jumps: false, step: Some(FINE_STEP), ..Default::default() };
        let me = evolve_master_with(&p, &DensityMatrix::vacuum(b.clone()), &opts).unwrap();
        let nhh_opts = NhhOptions { step: Some(FINE_STEP), ..Default::default() };
        let nhh = evolve_nhh_with(&p.clone().with_scheme(Scheme::AntiPtNhh), &StateVector::vacuum(b), &nhh_opts).unwrap();
        for (x, y) in me.records.iter().zip(&nhh.records) {
            for (u, v) in fields(x).iter().zip(fields(y)) {
                // Same step on ρ and on ψ; the two RK4 schemes differ only at O(h⁵).
                assert!((u - v).abs() <= 1e-6 * v.abs().max(1e-12), "{u:e} vs {v:e}");
            }
        }
    }
}

#[test]
fn nhh_and_master_g4_agree_at_zero_phase() {
    let p = ModelParams::paper();
    let b = p.basis().unwrap();
    let me = evolve_master(&p, &DensityMatrix::vacuum(b.clone())).unwrap();
    let nhh = evolve_nhh(&p.clone().with_scheme(Scheme::AntiPtNhh), &StateVector::vacuum(b)).unwrap();
    for (x, y) in me.records.iter().zip(&nhh.records).skip(1) {
        assert!(rel_diff(x.g4, y.g4) < 0.01);
    }
}

#[test]
fn guides_are_equivalent_at_zero_phase() {
    let p = ModelParams::paper().with_truncation(Truncation::total(4));
    let t = evolve_master(&p, &DensityMatrix::vacuum(p.basis().unwrap())).unwrap();
    for r in &t.records {
        assert!((r.n[0] - r.n[2]).abs() < 1e-10);
        assert!((r.n[1] - r.n[3]).abs() < 1e-10);
    }
}

#[test]
fn step_halving_converges() {
    let p = ModelParams::paper().with_theta(0.9);
    let b = p.basis().unwrap();
    let h = default_step(&p);
    let run = |step| {
        let opts = MasterOptions { step: Some(step), ..Default::default() };
        evolve_master_with(&p, &DensityMatrix::vacuum(b.clone()), &opts).unwrap()
    };
    let (coarse, fine) = (run(h), run(h / 2.0));
    for (x, y) in coarse.records.iter().zip(&fine.records).skip(1) {
        for (k, (u, v)) in fields(x).iter().zip(fields(y)).enumerate() {
            if v.abs() > 1e-300 {
                assert!(rel_diff(*u, v) < 1e-6, "field {k} at z = {}: {u:e} vs {v:e}", x.z);
            }
        }
    }
}

#[test]
fn default_step_rule() {
    let p = ModelParams::paper();
    assert_abs_diff_eq!(default_step(&p), 4e-3 / 400.0, epsilon = 1e-18);
    let p = ModelParams::new(6.93, 1e4, 0.0, Scheme::AntiPtMaster);
    assert_abs_diff_eq!(default_step(&p), 1.0 / 4e5, epsilon = 1e-18);
}

#[test]
fn classical_dark_input_is_constant() {
    let z = uniform_grid(1e-2, 11).unwrap();
    let t = evolve_classical(GAMMA, (C64::new(1.0, 0.0), C64::new(-1.0, 0.0)), &z).unwrap();
    for (a, b) in t.a.iter().zip(&t.b) {
        assert_abs_diff_eq!((a - C64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((b + C64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }
}

#[test]
fn classical_single_guide_input_splits_evenly() {
    let mut z = uniform_grid(1e-2, 11).unwrap();
    z.push(1.0);
    let t = evolve_classical(GAMMA, (C64::new(1.0, 0.0), C64::new(0.0, 0.0)), &z).unwrap();
    for (a, b) in t.a.iter().zip(&t.b) {
        assert_abs_diff_eq!((a - b).re, 1.0, epsilon = 1e-15);
    }
    let (a, b) = (*t.a.last().unwrap(), *t.b.last().unwrap());
    assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(b.re, -0.5, epsilon = 1e-12);
    assert!(t.imbalance().last().unwrap().abs() < 1e-12);
}

#[test]
fn classical_rejects_negative_rate() {
    assert!(evolve_classical(-1.0, (C64::new(1.0, 0.0), C64::new(0.0, 0.0)), &[0.0, 1.0]).is_err());
}
