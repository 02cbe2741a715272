use std::f64::consts::{PI, TAU};

use antipt_core::design::*;
use antipt_core::units::{per_cm_to_per_m, per_m_to_per_cm, CM, MW, NM, PM_PER_V, UM, UW};
use antipt_core::{Error, C64};
use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn paper_g() -> f64 {
    nonlinear_g(0.92, 1.11 * UM * UM, 1.8926, 2.1265, 1550.0 * NM, 775.0 * NM, 17.19 * PM_PER_V).unwrap()
}

#[test]
fn poling_period() {
    let l = qpm_period(2.1262, 1.8875, 1550.0 * NM).unwrap();
    assert_abs_diff_eq!(l / UM, 3.25, epsilon = 0.01);
    let l = qpm_period(2.0, 1.9, 1.55 * UM).unwrap();
    assert_abs_diff_eq!(l / UM, 7.75, epsilon = 1e-9);
    assert!(matches!(qpm_period(1.9, 1.9, 1.55 * UM), Err(Error::NoPhaseMatching { .. })));
    assert!(qpm_period(1.8, 1.9, 1.55 * UM).is_err());
    assert!(qpm_period(2.0, 1.9, 0.0).is_err());
}

#[test]
fn period_cancels_the_mismatch() {
    for (np, nf, lam) in [(2.1262, 1.8875, 1550.0 * NM), (2.0, 1.9, 1.55 * UM), (2.3, 2.2999, 1064.0 * NM)] {
        let period = qpm_period(np, nf, lam).unwrap();
        assert!(phase_mismatch(np, nf, lam, period).abs() < 1e-9 * TAU / period);
    }
}

#[test]
fn hopping() {
    assert_abs_diff_eq!(per_m_to_per_cm(hopping_rate(205.0 * UM).unwrap()), 76.62, epsilon = 0.01);
    assert_abs_diff_eq!(per_m_to_per_cm(hopping_rate(0.5 * CM).unwrap()), 3.14, epsilon = 0.01);
    let k = hopping_rate(1e-3).unwrap();
    assert_abs_diff_eq!(hopping_rate(2e-3).unwrap(), k / 2.0, epsilon = 1e-12);
    assert!(hopping_rate(0.0).is_err());
    assert!(hopping_rate(-1.0).is_err());
}

#[test]
fn eliminated_coupling() {
    let g = effective_coupling(per_cm_to_per_m(76.62), per_cm_to_per_m(813.0)).unwrap();
    assert_abs_diff_eq!(per_m_to_per_cm(g), 7.22, epsilon = 0.01);
    assert_eq!(effective_coupling(0.0, 100.0).unwrap(), 0.0);
    let g = effective_coupling(per_cm_to_per_m(10.0), per_cm_to_per_m(100.0)).unwrap();
    assert_abs_diff_eq!(per_m_to_per_cm(g), 1.0, epsilon = 1e-12);
    assert!(effective_coupling(1.0, 0.0).is_err());
}

#[test]
fn anchors_compose() {
    let g = effective_coupling(hopping_rate(205.0 * UM).unwrap(), per_cm_to_per_m(813.0)).unwrap();
    assert!(rel(per_m_to_per_cm(g), 7.22) < 2e-3);
}

#[test]
fn unit_round_trips() {
    for x in [0.0, 1.0, 7.22, 813.0, 1e-7] {
        assert_eq!(per_cm_to_per_m(x), 100.0 * x);
        assert_eq!(per_m_to_per_cm(per_cm_to_per_m(x)), x);
    }
}

#[test]
fn nonlinear_coefficient() {
    assert!(rel(paper_g(), 1.08e10) < 0.01);
    let zero = nonlinear_g(0.92, 1.11 * UM * UM, 1.8926, 2.1265, 1550.0 * NM, 775.0 * NM, 0.0).unwrap();
    assert_eq!(zero, 0.0);
    let wide = nonlinear_g(0.92, 2.22 * UM * UM, 1.8926, 2.1265, 1550.0 * NM, 775.0 * NM, 17.19 * PM_PER_V).unwrap();
    assert!(rel(wide, paper_g() / 2f64.sqrt()) < 1e-12);
    assert!(nonlinear_g(0.92, 0.0, 1.8926, 2.1265, 1550.0 * NM, 775.0 * NM, 17.19 * PM_PER_V).is_err());
    assert!(nonlinear_g(0.92, 1e-12, -1.0, 2.1265, 1550.0 * NM, 775.0 * NM, 17.19 * PM_PER_V).is_err());
}

#[test]
fn pump_field() {
    let eps = pump_amplitude(4.0 * MW, 775.4 * NM).unwrap();
    assert!(rel(eps, 6.41e-10) < 0.01);
    assert_eq!(pump_amplitude(0.0, 775.4 * NM).unwrap(), 0.0);
    assert!(pump_amplitude(-1.0, 775.4 * NM).is_err());
    assert!(rel(paper_g() * eps, 6.93) < 0.01);
}

#[test]
fn shg_coefficient_follows_its_formula() {
    let g = g_exp_from_shg(2.8 * MW, 17.4 * UW, 4e-3, 1550.0 * NM, 775.0 * NM).unwrap();
    assert!(g.is_finite() && g > 0.0);
    let again = g_exp_from_shg(2.8 * MW, 17.4 * UW, 4e-3, 1550.0 * NM, 775.0 * NM).unwrap();
    assert_eq!(g, again);
    assert_eq!(g_exp_from_shg(2.8 * MW, 0.0, 4e-3, 1550.0 * NM, 775.0 * NM).unwrap(), 0.0);
    let quad = g_exp_from_shg(2.8 * MW, 4.0 * 17.4 * UW, 4e-3, 1550.0 * NM, 775.0 * NM).unwrap();
    assert!(rel(quad, 2.0 * g) < 1e-12);
    assert!(g_exp_from_shg(0.0, 17.4 * UW, 4e-3, 1550.0 * NM, 775.0 * NM).is_err());
}

#[test]
fn four_photon_normalization() {
    let r = [1000.0; 4];
    let w = [80e-9; 3];
    assert_eq!(g4_exp_normalization(0.0, r, 1800.0, w).unwrap(), 0.0);
    let v = g4_exp_normalization(100.0, r, 1800.0, w).unwrap();
    assert!(rel(v, 1.085e8) < 1e-3);
    let half = g4_exp_normalization(100.0, r, 1800.0, [40e-9; 3]).unwrap();
    assert!(rel(half, 8.0 * v) < 1e-12);
    assert!(g4_exp_normalization(100.0, [1000.0, 0.0, 1000.0, 1000.0], 1800.0, w).is_err());
    assert!(g4_exp_normalization(100.0, r, 1800.0, [80e-9, 0.0, 80e-9]).is_err());
}

#[test]
fn paper_design_report() {
    let r = WaveguideDesign::paper().report().unwrap();
    assert_abs_diff_eq!(r.poling_period / UM, 3.25, epsilon = 0.01);
    assert_abs_diff_eq!(per_m_to_per_cm(r.kappa), 76.62, epsilon = 0.01);
    assert_abs_diff_eq!(per_m_to_per_cm(r.gamma), 7.22, epsilon = 0.01);
    assert!(rel(r.g, 1.08e10) < 0.01);
    assert!(rel(r.epsilon, 6.41e-10) < 0.01);
    assert!(rel(r.g_eps, 6.93) < 0.01);
}

fn gaussian(n: usize, half_width: f64, wx: f64, wy: f64) -> FieldGrid {
    let d = 2.0 * half_width / n as f64;
    FieldGrid::from_fn(n, n, d, d, |x, y| {
        C64::new((-(x * x) / (wx * wx) - (y * y) / (wy * wy)).exp(), 0.0)
    })
    .unwrap()
}

#[test]
fn uniform_fields_overlap_fully() {
    let f = FieldGrid::from_fn(10, 5, 0.2 * UM, 0.3 * UM, |_, _| C64::new(1.0, 0.0)).unwrap();
    let (zeta, area) = overlap_and_area(&f, &f).unwrap();
    assert_abs_diff_eq!(zeta, 1.0, epsilon = 1e-12);
    assert!(rel(area, 10.0 * 5.0 * 0.2 * 0.3 * UM * UM) < 1e-12);
}

#[test]
fn overlap_ignores_field_scale() {
    let (a, b) = (gaussian(60, 3.0, 1.0, 0.7), gaussian(60, 3.0, 0.6, 0.5));
    let (z0, a0) = overlap_and_area(&a, &b).unwrap();
    for c in [C64::new(3.0, 0.0), C64::new(-0.2, 0.5)] {
        let (z1, a1) = overlap_and_area(&a.scaled(c), &b).unwrap();
        let (z2, _) = overlap_and_area(&a, &b.scaled(c)).unwrap();
        assert!(rel(z1, z0) < 1e-12 && rel(z2, z0) < 1e-12);
        assert!(rel(a1, a0) < 1e-12);
    }
}

#[test]
fn gaussian_profiles_match_analytic_integrals() {
    // Separable Gaussians: ∫e^{−αx²}dx = √(π/α) in each direction.
    let (w1x, w1y, w2x, w2y) = (1.0, 0.7, 0.6, 0.5);
    let line = |a: f64| (PI / a).sqrt();
    let plane = |ax: f64, ay: f64| line(ax) * line(ay);
    let area = |wx: f64, wy: f64| {
        let p = plane(2.0 / (wx * wx), 2.0 / (wy * wy));
        let q = plane(3.0 / (wx * wx), 3.0 / (wy * wy));
        p.powi(3) / (q * q)
    };
    let num = plane(2.0 / (w1x * w1x) + 1.0 / (w2x * w2x), 2.0 / (w1y * w1y) + 1.0 / (w2y * w2y));
    let q1 = plane(3.0 / (w1x * w1x), 3.0 / (w1y * w1y));
    let q2 = plane(3.0 / (w2x * w2x), 3.0 / (w2y * w2y));
    let zeta = num / (q1.powf(2.0 / 3.0) * q2.powf(1.0 / 3.0));
    let a_eff = (area(w1x, w1y).powi(2) * area(w2x, w2y)).cbrt();

    let (z, a) = overlap_and_area(&gaussian(200, 5.0, w1x, w1y), &gaussian(200, 5.0, w2x, w2y)).unwrap();
    assert!(rel(z, zeta) < 1e-3, "{z} vs {zeta}");
    assert!(rel(a, a_eff) < 1e-3, "{a} vs {a_eff}");

    // Refinement: halving the cell size moves neither quantity by more than 0.1%.
    let (zc, ac) = overlap_and_area(&gaussian(100, 5.0, w1x, w1y), &gaussian(100, 5.0, w2x, w2y)).unwrap();
    assert!(rel(zc, z) < 1e-3 && rel(ac, a) < 1e-3);
}

#[test]
fn overlap_rejects_bad_fields() {
    let a = gaussian(20, 3.0, 1.0, 1.0);
    let b = gaussian(30, 3.0, 1.0, 1.0);
    assert!(overlap_and_area(&a, &b).is_err());
    let zero = a.scaled(C64::new(0.0, 0.0));
    assert!(overlap_and_area(&a, &zero).is_err());
    assert!(FieldGrid::new(2, 2, 1.0, 1.0, vec![C64::new(1.0, 0.0); 3]).is_err());
}

#[test]
fn field_grid_parser() {
    let text = "# transverse field\n3 2 1e-7, 2e-7\n1 2 3\n4,5,6\n";
    let g: FieldGrid = text.parse().unwrap();
    assert_eq!((g.nx, g.ny), (3, 2));
    assert_eq!(g.dy, 2e-7);
    assert_eq!(g.values[4], C64::new(5.0, 0.0));

    let err = "3 2 1e-7\n1 2 3\n".parse::<FieldGrid>().unwrap_err().to_string();
    assert!(err.contains("line 1"), "{err}");
    let err = "2 2 1e-7 1e-7\n1 2\n3 x\n".parse::<FieldGrid>().unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
    assert!("2 2 1e-7 1e-7\n1 2\n3\n".parse::<FieldGrid>().is_err());
}

#[test]
fn calibration_recovers_paper_parameters() {
    let data = synthetic_calibration(1.0, 0.037, 1.2, 0.56, 242.0, 60);
    let fit = phase_calibration_fit(&data).unwrap();
    assert!(rel(fit.b, 0.037) < 0.01);
    assert!(rel(fit.theta0, 0.56) < 0.01);
    assert!(rel(fit.a, 1.0) < 0.01);
    assert!(rel(fit.c, 1.2) < 0.01);
    assert!(fit.residual < 1e-9);
    let (pa, pb) = fit.predict(100.0);
    assert!(rel(pa, 1.0 * (0.037f64 * 100.0 + 0.56).cos() + 1.2) < 1e-6);
    assert!(rel(pb, 1.2 - (0.037f64 * 100.0 + 0.56).cos()) < 1e-6);
}

#[test]
fn calibration_tolerates_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut data = synthetic_calibration(1.0, 0.037, 1.2, 0.56, 242.0, 60);
    for s in &mut data {
        s.p_a *= 1.0 + noise.sample(&mut rng);
        s.p_b *= 1.0 + noise.sample(&mut rng);
    }
    let fit = phase_calibration_fit(&data).unwrap();
    assert!(rel(fit.b, 0.037) < 0.05, "b = {}", fit.b);
    assert!(fit.residual > 0.0);
}

#[test]
fn calibration_rejects_degenerate_data() {
    let flat: Vec<_> = (0..20).map(|k| CalibrationSample { heater_mw: k as f64, p_a: 1.0, p_b: 1.0 }).collect();
    assert!(matches!(phase_calibration_fit(&flat), Err(Error::FitDegenerate(_))));
    let few = synthetic_calibration(1.0, 0.037, 1.2, 0.56, 242.0, MIN_SAMPLES - 1);
    assert!(matches!(phase_calibration_fit(&few), Err(Error::FitDegenerate(_))));
    // Less than π of phase excursion leaves b unidentifiable.
    let short = synthetic_calibration(1.0, 0.037, 1.2, 0.56, 40.0, 30);
    assert!(phase_calibration_fit(&short).is_err());
    let mut bad = synthetic_calibration(1.0, 0.037, 1.2, 0.56, 242.0, 30);
    bad[3].p_a = f64::NAN;
    assert!(phase_calibration_fit(&bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn calibration_phase_is_wrapped(theta0 in 0.0f64..TAU, turns in -3i32..4) {
        let data = synthetic_calibration(0.8, 0.037, 1.0, theta0 + TAU * turns as f64, 242.0, 48);
        let fit = phase_calibration_fit(&data).unwrap();
        prop_assert!((0.0..TAU).contains(&fit.theta0));
        let d = (fit.theta0 - theta0).rem_euclid(TAU);
        prop_assert!(d.min(TAU - d) < 1e-6, "fit θ0 = {}, expected {}", fit.theta0, theta0);
        prop_assert!((fit.b - 0.037).abs() < 1e-8);
    }
}
