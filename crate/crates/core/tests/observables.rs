use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use antipt_core::fock::{DensityMatrix, FockBasis, ModeId, StateVector};
use antipt_core::model::{ModelParams, Truncation};
use antipt_core::observables::{
    argmax, argmin, correlation_record, endpoint_record, g4, normally_ordered_moment, r3, r4, sweep_phase,
    sweep_phase_points, theta_grid, visibility, CorrelationRecord, Engine, SweepOptions, G3_TRIPLES,
};
use antipt_core::propagate::evolve_master;
use antipt_core::validation::rel_diff;
use antipt_core::{Error, C64};
use approx::assert_abs_diff_eq;
use nalgebra::DVector;

const PAIR: [(ModeId, bool); 4] = [(ModeId::AS, true), (ModeId::AI, true), (ModeId::AI, false), (ModeId::AS, false)];

fn small() -> ModelParams {
    ModelParams::paper().with_truncation(Truncation::total(4))
}

/// Two-mode squeezed vacuum with sinh²r = n on modes (AS, AI), then the same on (BS, BI) when `second` is set.
fn squeezed(n_a: f64, n_b: Option<f64>, cap: usize) -> StateVector {
    let modes = ModeId::waveguide_modes();
    let basis = Arc::new(FockBasis::new(&modes, cap, None).unwrap());
    let coeff = |n: f64, k: usize| {
        let r = n.sqrt().asinh();
        r.tanh().powi(k as i32) / r.cosh()
    };
    let amps = DVector::from_fn(basis.dim(), |i, _| {
        let o = basis.occupation(i);
        if o[0] != o[1] || o[2] != o[3] {
            return C64::new(0.0, 0.0);
        }
        let b = match n_b {
            Some(nb) => coeff(nb, o[2] as usize),
            None if o[2] == 0 => 1.0,
            None => 0.0,
        };
        C64::new(coeff(n_a, o[0] as usize) * b, 0.0)
    });
    StateVector::new(basis, amps).unwrap().normalized().unwrap()
}

#[test]
fn vacuum_moments_vanish() {
    let b = ModelParams::paper().basis().unwrap();
    let vac = DensityMatrix::vacuum(b);
    assert_eq!(normally_ordered_moment(&vac, &PAIR).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn single_pair_moment() {
    let b = ModelParams::paper().basis().unwrap();
    let psi = StateVector::fock(b, &[(ModeId::AS, 1), (ModeId::AI, 1)]).unwrap();
    assert_abs_diff_eq!(normally_ordered_moment(&psi, &PAIR).unwrap().re, 1.0, epsilon = 1e-15);
}

#[test]
fn squeezed_arm_bunching() {
    let psi = squeezed(0.1, None, 14);
    let spec = [(ModeId::AS, true), (ModeId::AS, true), (ModeId::AS, false), (ModeId::AS, false)];
    assert_abs_diff_eq!(normally_ordered_moment(&psi, &spec).unwrap().re, 0.02, epsilon = 1e-12);
    let rec = correlation_record(&psi, 0.0, 0.0).unwrap();
    assert_abs_diff_eq!(rec.n[0], 0.1, epsilon = 1e-12);
}

#[test]
fn moments_reject_bad_specs() {
    let b = ModelParams::paper().basis().unwrap();
    let vac = DensityMatrix::vacuum(b);
    assert!(normally_ordered_moment(&vac, &[(ModeId::AS, false), (ModeId::AS, true)]).is_err());
    assert!(normally_ordered_moment(&vac, &[(ModeId::CS, true), (ModeId::CS, false)]).is_err());
}

#[test]
fn independent_sources_factorize() {
    let psi = squeezed(0.05, Some(0.08), 7);
    let rec = correlation_record(&psi, 0.0, 0.0).unwrap();
    let (ga, gb) = (rec.g2_normalized(0).unwrap(), rec.g2_normalized(1).unwrap());
    assert!(rel_diff(g4(&rec).unwrap(), ga * gb) < 1e-9);
    assert!(rel_diff(r4(&rec).unwrap(), 1.0) < 1e-9);
    for t in &G3_TRIPLES {
        assert!(rel_diff(r3(&rec, t).unwrap(), 1.0) < 1e-9);
    }
}

#[test]
fn vacuum_ratios_are_undefined() {
    let b = ModelParams::paper().basis().unwrap();
    let rec = correlation_record(&DensityMatrix::vacuum(b), 0.0, 0.0).unwrap();
    assert!(matches!(g4(&rec), Err(Error::UndefinedObservable(_))));
    assert!(matches!(r4(&rec), Err(Error::UndefinedObservable(_))));
    assert!(matches!(r3(&rec, &G3_TRIPLES[1]), Err(Error::UndefinedObservable(_))));
}

#[test]
fn r4_is_g4_over_pair_bunching() {
    let p = small().with_theta(1.0);
    let rec = evolve_master(&p, &DensityMatrix::vacuum(p.basis().unwrap())).unwrap().endpoint().clone();
    let expect = g4(&rec).unwrap() / (rec.g2_normalized(0).unwrap() * rec.g2_normalized(1).unwrap());
    assert!(rel_diff(r4(&rec).unwrap(), expect) < 1e-12);
}

#[test]
fn visibility_examples() {
    assert_eq!(visibility(&[0.3, 0.3, 0.3]).unwrap(), 0.0);
    assert_eq!(visibility(&[1.0, 0.0]).unwrap(), 1.0);
    assert!(visibility(&[]).is_err());
    assert!(matches!(visibility(&[0.0, 0.0]), Err(Error::UndefinedObservable(_))));
}

#[test]
fn extremum_indices() {
    let c = [3.0, 1.0, 2.0, 1.0, 5.0];
    assert_eq!(argmin(&c), Some(1));
    assert_eq!(argmax(&c), Some(4));
    assert_eq!(argmin(&[]), None);
}

#[test]
fn default_grid_contains_showcase_phases() {
    let g = theta_grid(33);
    assert_eq!(g.len(), 33);
    assert_eq!(g[0], 0.0);
    assert_abs_diff_eq!(g[8], PI / 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(g[16], PI, epsilon = 1e-15);
    assert_abs_diff_eq!(g[32], TAU, epsilon = 1e-15);
}

#[test]
fn single_point_sweep_is_the_endpoint() {
    let p = small();
    let sweep = sweep_phase(&p, &[0.0], Engine::Master).unwrap();
    let direct = evolve_master(&p, &DensityMatrix::vacuum(p.basis().unwrap())).unwrap();
    assert_eq!(sweep.len(), 1);
    assert_eq!(&sweep[0], direct.endpoint());
}

#[test]
fn sweeps_are_sorted_and_deterministic() {
    let p = small();
    let grid = [2.0, 0.5, 1.0];
    let a = sweep_phase(&p, &grid, Engine::Gaussian).unwrap();
    let b = sweep_phase(&p, &grid, Engine::Gaussian).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.iter().map(|r| r.theta).collect::<Vec<_>>(), vec![0.5, 1.0, 2.0]);
}

#[test]
fn sweeps_reject_bad_grids() {
    let p = small();
    assert!(sweep_phase(&p, &[], Engine::Nhh).is_err());
    assert!(sweep_phase(&p, &[f64::NAN], Engine::Nhh).is_err());
}

#[test]
fn failing_points_carry_their_phase() {
    let p = small().with_three_mode(7662.0, 81300.0);
    let out = sweep_phase_points(&p, &[0.0, 1.0], Engine::Gaussian, &SweepOptions::default()).unwrap();
    for (theta, r) in out {
        match r {
            Err(Error::AtPhase { theta: t, .. }) => assert_eq!(t, theta),
            other => panic!("expected a phase-annotated error, got {other:?}"),
        }
    }
}

#[test]
fn observables_are_periodic_in_phase() {
    let p = small();
    for engine in [Engine::Master, Engine::Nhh, Engine::Gaussian] {
        let a = endpoint_record(&p.clone().with_theta(0.7), engine, &SweepOptions::default()).unwrap();
        let b = endpoint_record(&p.clone().with_theta(0.7 + TAU), engine, &SweepOptions::default()).unwrap();
        assert!(rel_diff(a.g4, b.g4) < 1e-10);
        assert!(rel_diff(a.n[0], b.n[0]) < 1e-10);
    }
}

#[test]
fn four_photon_correlation_is_reflection_symmetric() {
    let p = small();
    for engine in [Engine::Master, Engine::Gaussian] {
        let a = endpoint_record(&p.clone().with_theta(1.1), engine, &SweepOptions::default()).unwrap();
        let b = endpoint_record(&p.clone().with_theta(-1.1), engine, &SweepOptions::default()).unwrap();
        assert!(rel_diff(a.g4, b.g4) < 1e-8);
    }
}

fn max_over_min(records: &[CorrelationRecord], k: usize) -> f64 {
    let v: Vec<f64> = records.iter().map(|r| r.g2_normalized(k).unwrap()).collect();
    v.iter().copied().fold(f64::MIN, f64::max) / v.iter().copied().fold(f64::MAX, f64::min)
}

#[test]
fn inter_waveguide_pairs_are_the_phase_sensitive_ones() {
    let recs = sweep_phase(&ModelParams::paper(), &theta_grid(17), Engine::Gaussian).unwrap();
    let (a, b) = (max_over_min(&recs, 0), max_over_min(&recs, 1));
    let (x, y) = (max_over_min(&recs, 2), max_over_min(&recs, 3));
    println!("normalized g2 max/min: intra {a:.4} {b:.4}, inter {x:.1} {y:.1}");
    assert!(a < 1.5 && b < 1.5);
    assert!(x > 100.0 && y > 100.0);
}

#[test]
fn records_are_physical() {
    let recs = sweep_phase(&small(), &theta_grid(5), Engine::Master).unwrap();
    for r in &recs {
        assert!(r.n.iter().all(|&n| n >= -1e-12));
        assert!(r.g2.iter().chain(&r.g3).all(|&g| g >= -1e-10));
        assert!(r.g4 >= -1e-10);
    }
}

#[test]
fn jumps_break_the_bright_dark_balance_at_pi() {
    let p = ModelParams::paper().with_theta(PI);
    let me = endpoint_record(&p, Engine::Master, &SweepOptions::default()).unwrap();
    let nhh = endpoint_record(&p, Engine::Nhh, &SweepOptions::default()).unwrap();
    assert!(me.bright_dark_asymmetry().iter().all(|&a| a > 1e-3));
    assert!(nhh.bright_dark_asymmetry().iter().all(|&a| a < 1e-8));
}

#[test]
fn master_g4_is_lower_at_pi() {
    let p = ModelParams::paper();
    let at0 = endpoint_record(&p, Engine::Master, &SweepOptions::default()).unwrap();
    let atpi = endpoint_record(&p.clone().with_theta(PI), Engine::Master, &SweepOptions::default()).unwrap();
    assert!(g4(&atpi).unwrap() < g4(&at0).unwrap());
}
