//! Acceptance checks A1–A11, shared by the test suite and `antipt validate`.
//!
//! Every criterion returns a [`CriterionReport`] listing the measured residuals
//! next to the requirement they were held to. Solver failures become report
//! entries rather than errors.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use nalgebra::{DMatrix, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::design::{
    effective_coupling, hopping_rate, nonlinear_g, phase_calibration_fit, pump_amplitude, qpm_period,
    synthetic_calibration, WaveguideDesign,
};
use crate::fock::{ladder, BdDirection, BrightDarkMap, DensityMatrix, FockBasis, LadderKind, ModeId, SparseOperator};
use crate::gaussian::closed_form::{coherent_pi_g4, coherent_theta0_g4};
use crate::gaussian::{
    g4_from_covariance, moment_ode, noise_commutator, transfer_antipt, transfer_coherent_pi, transfer_coherent_theta0,
    wick_moment, CovarianceState, NoiseFamily, NoiseKernels, PhaseCase, COV_MODES,
};
use crate::model::{
    build_h_nl, build_h_nl_bd_with, uniform_grid, ModelParams, NonlinearCoeffs, Scheme, Truncation, PAPER_LENGTH,
};
use crate::observables::{argmax, argmin, sweep_phase, theta_grid, visibility, CorrelationRecord, Engine};
use crate::propagate::{
    evolve_classical, evolve_master, evolve_master_with, evolve_nhh, MasterOptions, RecordedState, Trajectory,
};
use crate::units::{per_m_to_per_cm, CM, MW, NM, PM_PER_V, UM};
use crate::{Result, C64};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub requirement: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check { name: name.into(), measured, requirement: format!("< {limit:e}"), passed: measured < limit }
    }

    pub fn above(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check { name: name.into(), measured, requirement: format!("> {limit:e}"), passed: measured > limit }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check { name: name.into(), measured, requirement: format!(">= {limit}"), passed: measured >= limit }
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            requirement: format!("in [{lo}, {hi}]"),
            passed: measured >= lo && measured <= hi,
        }
    }

    pub fn near(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            requirement: format!("{target} ± {tol}"),
            passed: (measured - target).abs() <= tol,
        }
    }

    pub fn near_rel(name: impl Into<String>, measured: f64, target: f64, rel: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            requirement: format!("{target:e} ± {}%", rel * 100.0),
            passed: (measured - target).abs() <= rel * target.abs(),
        }
    }

    pub fn equals(name: impl Into<String>, measured: f64, target: f64) -> Self {
        Check { name: name.into(), measured, requirement: format!("= {target}"), passed: measured == target }
    }

    pub fn holds(name: impl Into<String>, measured: f64, ok: bool, requirement: impl Into<String>) -> Self {
        Check { name: name.into(), measured, requirement: requirement.into(), passed: ok }
    }

    /// Reported value with no requirement attached.
    pub fn info(name: impl Into<String>, measured: f64) -> Self {
        Check { name: name.into(), measured, requirement: "reported".into(), passed: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{} {status} {} ({:.1} s)", self.id, self.title, self.seconds)?;
        if let Some(e) = &self.error {
            write!(f, " error: {e}")?;
        }
        for c in self.failures() {
            write!(f, "; {} = {:e} (need {})", c.name, c.measured, c.requirement)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Total photon cap of the two-guide master-equation runs; A1 compares it with cap + 2.
    pub cap: usize,
    /// Debug mutation: negate Λ_co in the bright/dark Hamiltonian and moment equations.
    pub flip_lambda_co: bool,
    pub theta_points: usize,
    pub threads: Option<usize>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { cap: 6, flip_lambda_co: false, theta_points: 33, threads: None }
    }
}

pub const CRITERIA: [(&str, &str); 11] = [
    ("A1", "truncation convergence"),
    ("A2", "master equation vs Gaussian G4(z); closed forms"),
    ("A3", "master equation vs non-Hermitian dynamics"),
    ("A4", "quantum-jump signatures"),
    ("A5", "G4 phase-fringe visibility"),
    ("A6", "inter-pair ratios"),
    ("A7", "decoherence-free subspace and moment equations"),
    ("A8", "adiabatic elimination of the coupler"),
    ("A9", "Gaussian engine integrity"),
    ("A10", "design numbers and calibration"),
    ("A11", "classical equal splitting"),
];

/// Endpoint records over the θ grid for each engine.
#[derive(Debug, Clone)]
pub struct PhaseSweeps {
    pub theta: Vec<f64>,
    pub master: Vec<CorrelationRecord>,
    pub nhh: Vec<CorrelationRecord>,
    pub gaussian: Vec<CorrelationRecord>,
    pub coherent: Vec<CorrelationRecord>,
}

impl PhaseSweeps {
    /// Grid index of θ = π.
    pub fn pi_index(&self) -> Option<usize> {
        self.theta.iter().position(|t| (t - PI).abs() < 1e-12)
    }
}

/// Runs criteria on demand; the phase sweeps shared by A4–A6 are computed once.
pub struct Validator {
    opts: ValidationOptions,
    sweeps: OnceLock<std::result::Result<PhaseSweeps, String>>,
}

impl Validator {
    pub fn new(opts: ValidationOptions) -> Self {
        Validator { opts, sweeps: OnceLock::new() }
    }

    pub fn options(&self) -> &ValidationOptions {
        &self.opts
    }

    pub fn run_all(&self) -> Vec<CriterionReport> {
        CRITERIA.iter().map(|(id, _)| self.run(id).expect("known id")).collect()
    }

    pub fn run(&self, id: &str) -> Option<CriterionReport> {
        let &(id, title) = CRITERIA.iter().find(|(k, _)| k.eq_ignore_ascii_case(id))?;
        let start = Instant::now();
        let result = match id {
            "A1" => self.a1(),
            "A2" => self.a2(),
            "A3" => self.a3(),
            "A4" => self.a4(),
            "A5" => self.a5(),
            "A6" => self.a6(),
            "A7" => self.a7(),
            "A8" => self.a8(),
            "A9" => self.a9(),
            "A10" => self.a10(),
            _ => self.a11(),
        };
        let (checks, error) = match result {
            Ok(c) => (c, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        Some(CriterionReport { id, title, checks, error, seconds: start.elapsed().as_secs_f64() })
    }

    pub fn sweeps(&self) -> std::result::Result<&PhaseSweeps, String> {
        self.sweeps.get_or_init(|| self.compute_sweeps().map_err(|e| e.to_string())).as_ref().map_err(Clone::clone)
    }

    fn compute_sweeps(&self) -> Result<PhaseSweeps> {
        let theta = theta_grid(self.opts.theta_points);
        let template = self.paper();
        let run = |engine| sweep_phase(&template, &theta, engine);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.opts.threads.unwrap_or(0))
            .build()
            .map_err(|e| crate::Error::invalid(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            Ok(PhaseSweeps {
                master: run(Engine::Master)?,
                nhh: run(Engine::Nhh)?,
                gaussian: run(Engine::Gaussian)?,
                coherent: run(Engine::Coherent)?,
                theta: theta.clone(),
            })
        })
    }

    fn paper(&self) -> ModelParams {
        ModelParams::paper().with_truncation(Truncation::total(self.opts.cap))
    }

    fn a1(&self) -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        for theta in [0.0, FRAC_PI_2, PI] {
            let coarse = self.paper().with_theta(theta);
            let fine = coarse.clone().with_truncation(Truncation::total(self.opts.cap + 2));
            let a = master(&coarse)?;
            let b = master(&fine)?;
            let worst = a
                .records
                .iter()
                .zip(&b.records)
                .skip(1)
                .flat_map(|(x, y)| record_fields(x).into_iter().zip(record_fields(y)).map(|(u, v)| rel_diff(u, v)))
                .fold(0.0, f64::max);
            checks.push(Check::below(
                format!("max relative change cap {}→{} at θ={theta:.4}", self.opts.cap, self.opts.cap + 2),
                worst,
                1e-3,
            ));
        }
        Ok(checks)
    }

    fn a2(&self) -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        for (scheme, name) in [(Scheme::AntiPtMaster, "anti-PT"), (Scheme::CoherentHermitian, "coherent")] {
            for theta in [0.0, PI] {
                let p = self.paper().with_scheme(scheme).with_theta(theta);
                let me = master(&p)?;
                let cov = moment_ode(&p, &p.z_grid)?;
                let mut worst: f64 = 0.0;
                for (r, c) in me.records.iter().zip(&cov).skip(1) {
                    worst = worst.max(rel_diff(r.g4, g4_from_covariance(c)?));
                }
                checks.push(Check::below(format!("{name} θ={theta:.4} max rel |G4_ME − G4_Gauss|"), worst, 1e-2));
            }
        }
        let p = self.paper();
        let (mut s12, mut s15): (f64, f64) = (0.0, 0.0);
        for &z in p.z_grid.iter().skip(1) {
            let m1 = g4_from_covariance(&transfer_coherent_theta0(&p, z)?.vacuum_covariance())?;
            s12 = s12.max(rel_diff(coherent_theta0_g4(p.g_eps, p.gamma, z), m1));
            let m2 = g4_from_covariance(&transfer_coherent_pi(&p, z)?.vacuum_covariance())?;
            s15 = s15.max(rel_diff(coherent_pi_g4(p.g_eps, z), m2));
        }
        checks.push(Check::below("coherent θ=0 closed-form G4 vs transfer matrix", s12, 1e-8));
        checks.push(Check::below("coherent θ=π closed-form G4 vs transfer matrix", s15, 1e-8));
        Ok(checks)
    }

    fn a3(&self) -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        for theta in [0.0, FRAC_PI_2, PI] {
            let p = self.paper().with_theta(theta);
            let me = master(&p)?;
            let nhh = evolve_nhh(&p.clone().with_scheme(Scheme::AntiPtNhh), &crate::fock::StateVector::vacuum(p.basis()?))?;
            let worst = me
                .records
                .iter()
                .zip(&nhh.records)
                .skip(1)
                .map(|(a, b)| rel_diff(a.g4, b.g4))
                .fold(0.0, f64::max);
            checks.push(Check::below(format!("θ={theta:.4} max rel |G4_ME − G4_NHH|"), worst, 1e-2));
            let (a, b) = (me.endpoint(), nhh.endpoint());
            let n_end = (0..4).map(|k| rel_diff(a.n[k], b.n[k])).fold(0.0, f64::max);
            let n_max = me
                .records
                .iter()
                .zip(&nhh.records)
                .skip(1)
                .flat_map(|(a, b)| (0..4).map(move |k| rel_diff(a.n[k], b.n[k])))
                .fold(0.0, f64::max);
            if theta == 0.0 {
                checks.push(Check::below("θ=0 rel |n_ME − n_NHH| at L", n_end, 1e-2));
                checks.push(Check::info("θ=0 max over z of rel |n_ME − n_NHH|", n_max));
            } else if theta == PI {
                checks.push(Check::above("θ=π rel |n_ME − n_NHH| at L", n_end, 1e-2));
            } else {
                checks.push(Check::info(format!("θ={theta:.4} rel |n_ME − n_NHH| at L"), n_end));
            }
        }
        Ok(checks)
    }

    fn a4(&self) -> Result<Vec<Check>> {
        let s = self.sweeps().map_err(crate::Error::invalid)?;
        let pi = s.pi_index().ok_or_else(|| crate::Error::invalid("θ grid does not contain π"))?;
        let me: Vec<f64> = s.master.iter().map(|r| r.g4_normalized()).collect::<Result<_>>()?;
        let nhh: Vec<f64> = s.nhh.iter().map(|r| r.g4_normalized()).collect::<Result<_>>()?;
        let me_min = argmin(&me).unwrap();
        let nhh_max = argmax(&nhh).unwrap();
        let asym = |r: &CorrelationRecord| r.bright_dark_asymmetry().into_iter().fold(0.0, f64::max);
        Ok(vec![
            Check::equals("θ of ME g4 grid minimum", s.theta[me_min], s.theta[pi]),
            Check::equals("θ of NHH g4 grid maximum", s.theta[nhh_max], s.theta[pi]),
            Check::above("ME bright/dark relative asymmetry at θ=π", asym(&s.master[pi]), 1e-3),
            Check::below("NHH bright/dark relative asymmetry at θ=π", asym(&s.nhh[pi]), 1e-8),
        ])
    }

    fn a5(&self) -> Result<Vec<Check>> {
        let s = self.sweeps().map_err(crate::Error::invalid)?;
        let pi = s.pi_index().ok_or_else(|| crate::Error::invalid("θ grid does not contain π"))?;
        let g4: Vec<f64> = s.master.iter().map(|r| r.g4).collect();
        Ok(vec![
            Check::at_least("G4(θ) visibility", visibility(&g4)?, 0.99 - 0.005),
            Check::equals("θ of G4 grid minimum", s.theta[argmin(&g4).unwrap()], s.theta[pi]),
        ])
    }

    fn a6(&self) -> Result<Vec<Check>> {
        let s = self.sweeps().map_err(crate::Error::invalid)?;
        let coh: Vec<f64> = s.coherent.iter().map(|r| r.r4()).collect::<Result<_>>()?;
        let lo = coh.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = coh.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut r4: f64 = 0.0;
        let mut r3: f64 = 0.0;
        for (a, b) in s.master.iter().zip(&s.gaussian) {
            r4 = r4.max(rel_diff(a.r4()?, b.r4()?));
            for k in 0..4 {
                r3 = r3.max(rel_diff(a.r3(k)?, b.r3(k)?));
            }
        }
        Ok(vec![
            Check::within("coherent R4 minimum over θ", lo, 0.9, 1.1),
            Check::within("coherent R4 maximum over θ", hi, 0.9, 1.1),
            Check::below("coherent R4 minimum over θ (anti-correlation)", lo, 1.0),
            Check::below("anti-PT max rel |R4_ME − R4_Gauss|", r4, 1e-2),
            Check::below("anti-PT max rel |R3_ME − R3_Gauss|", r3, 1e-2),
        ])
    }

    fn a7(&self) -> Result<Vec<Check>> {
        let mut checks = Vec::new();

        // Pure dissipation: dark populations frozen, bright ones decay at 4Γ.
        let mut p = self.paper();
        p.g_eps = 0.0;
        let basis = p.basis()?;
        let rho0 = DensityMatrix::fock(basis, &[(ModeId::AS, 1), (ModeId::BI, 1)])?;
        let opts = MasterOptions { step: Some(DFS_STEP), ..Default::default() };
        let traj = evolve_master_with(&p, &rho0, &opts)?;
        let first = &traj.records[0];
        let (mut dark, mut bright): (f64, f64) = (0.0, 0.0);
        for r in &traj.records {
            for f in 0..2 {
                dark = dark.max((r.n_dark[f] - first.n_dark[f]).abs());
                let expect = first.n_bright[f] * (-4.0 * p.gamma * r.z).exp();
                bright = bright.max(rel_diff(r.n_bright[f], expect));
            }
        }
        checks.push(Check::below("gε=0 max |n_D(z) − n_D(0)|", dark, 1e-10));
        checks.push(Check::below("gε=0 max rel |n_B(z) − n_B(0)e^{−4Γz}|", bright, 1e-8));

        // Bright/dark moment equations against finite differences of the master equation.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a7);
        let thetas = [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)];
        let mut eom: f64 = 0.0;
        let mut bd: f64 = 0.0;
        for theta in thetas {
            let p = self.paper().with_theta(theta);
            eom = eom.max(self.moment_equation_residual(&p)?);
            bd = bd.max(self.bd_hamiltonian_defect(&p)?);
        }
        checks.push(Check::below("max rel |FD d⟨n⟩/dz − moment equations| at random θ", eom, 1e-6));
        checks.push(Check::below("max |H_NL(B,D) − U H_NL U†| / gε", bd, 1e-12));
        Ok(checks)
    }

    fn coeffs(&self, p: &ModelParams) -> NonlinearCoeffs {
        let mut c = p.coefficients();
        if self.opts.flip_lambda_co {
            c.lambda_co = -c.lambda_co;
        }
        c
    }

    fn bd_hamiltonian_defect(&self, p: &ModelParams) -> Result<f64> {
        let basis = p.basis()?;
        let map = BrightDarkMap::new(basis.clone())?;
        let expected = map.apply(&build_h_nl(p, &basis)?, BdDirection::ToBd)?;
        let built = build_h_nl_bd_with(self.coeffs(p), &basis)?;
        Ok((&built - &expected).max_abs() / p.g_eps)
    }

    fn moment_equation_residual(&self, p: &ModelParams) -> Result<f64> {
        let (z0, d) = (EOM_POINT, EOM_SPACING);
        let grid = vec![0.0, z0 - 2.0 * d, z0 - d, z0, z0 + d, z0 + 2.0 * d];
        let p = p.clone().with_z_grid(grid);
        let basis = p.basis()?;
        let opts = MasterOptions { step: Some(EOM_STEP), record_states: true, ..Default::default() };
        let traj = evolve_master_with(&p, &DensityMatrix::vacuum(basis.clone()), &opts)?;
        let ops = BdOperators::new(&basis)?;
        let moments: Vec<BdMoments> = traj.states[1..]
            .iter()
            .map(|s| match s {
                RecordedState::Mixed(rho) => ops.moments(rho.matrix()),
                RecordedState::Pure(_) => unreachable!("the master equation records density matrices"),
            })
            .collect();
        let c = self.coeffs(&p);
        let m = &moments[2];
        let im = |x: C64| x.im;
        let g4 = 4.0 * p.gamma;
        let rhs = [
            -g4 * m.n[0] - 2.0 * im(c.lambda_co.conj() * m.bs_bi + c.lambda_x.conj() * m.bs_di),
            -g4 * m.n[1] - 2.0 * im(c.lambda_co.conj() * m.bs_bi + c.lambda_x.conj() * m.ds_bi),
            -2.0 * im(c.lambda_co.conj() * m.ds_di + c.lambda_x.conj() * m.ds_bi),
            -2.0 * im(c.lambda_co.conj() * m.ds_di + c.lambda_x.conj() * m.bs_di),
        ];
        let mut worst: f64 = 0.0;
        for (k, rhs) in rhs.iter().enumerate() {
            let f = |j: usize| moments[j].n[k];
            let fd = (-f(4) + 8.0 * f(3) - 8.0 * f(1) + f(0)) / (12.0 * d);
            worst = worst.max(rel_diff(fd, *rhs));
        }
        Ok(worst)
    }

    fn a8(&self) -> Result<Vec<Check>> {
        let grid = uniform_grid(PAPER_LENGTH, 5)?;
        let kappa = hopping_rate(205.0 * UM)?;
        let gamma_c = 813.0 / CM;
        let mut two = ModelParams::paper().with_z_grid(grid.clone()).with_truncation(A8_TWO_MODE);
        two.gamma = effective_coupling(kappa, gamma_c)?;
        let reference = master(&two)?.endpoint().clone();

        let run = |scale: f64, step_factor: f64| -> Result<CorrelationRecord> {
            let gc = gamma_c * scale;
            let p = ModelParams::paper()
                .with_z_grid(grid.clone())
                .with_three_mode(kappa * scale.sqrt(), gc)
                .with_truncation(A8_THREE_MODE);
            let opts = MasterOptions { step: Some(step_factor / gc), ..Default::default() };
            Ok(evolve_master_with(&p, &DensityMatrix::vacuum(p.basis()?), &opts)?.endpoint().clone())
        };

        let mut checks = Vec::new();
        let mut errs = Vec::new();
        for scale in [1.0, 3.0, 10.0] {
            let r = run(scale, A8_STEP)?;
            let en = (0..4).map(|k| rel_diff(r.n[k], reference.n[k])).fold(0.0, f64::max);
            let eg = rel_diff(r.g4, reference.g4);
            checks.push(Check::info(format!("×{scale} rel error ⟨n⟩"), en));
            checks.push(Check::info(format!("×{scale} rel error G4"), eg));
            errs.push((en, eg, r));
        }
        checks.push(Check::below("×1 rel error ⟨n⟩", errs[0].0, 0.05));
        checks.push(Check::below("×1 rel error G4", errs[0].1, 0.05));
        let mono_n = errs[0].0 > errs[1].0 && errs[1].0 > errs[2].0;
        let mono_g = errs[0].1 > errs[1].1 && errs[1].1 > errs[2].1;
        checks.push(Check::holds("⟨n⟩ error decreases ×1 → ×3 → ×10", errs[2].0, mono_n, "monotone"));
        checks.push(Check::holds("G4 error decreases ×1 → ×3 → ×10", errs[2].1, mono_g, "monotone"));
        let half = run(1.0, 0.5 * A8_STEP)?;
        let step_change = rel_diff(half.g4, errs[0].2.g4).max(rel_diff(half.n[0], errs[0].2.n[0]));
        checks.push(Check::below("×1 step-halving change", step_change, 1e-6));
        Ok(checks)
    }

    fn a9(&self) -> Result<Vec<Check>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa9);
        let mut wick: f64 = 0.0;
        for _ in 0..20 {
            let cov = random_covariance(&mut rng);
            for len in [2, 4, 6, 8] {
                let ops = random_normal_ordered(&mut rng, len);
                let fast = wick_moment(&cov, &ops)?;
                let slow = brute_force_moment(&cov, &ops);
                let scale = brute_force_scale(&cov, &ops).max(f64::MIN_POSITIVE);
                wick = wick.max((fast - slow).norm() / scale);
            }
        }

        let p = self.paper();
        let eta = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0).map(|x| C64::new(x, 0.0)));
        let (mut restore, mut bogo): (f64, f64) = (0.0, 0.0);
        for &z in p.z_grid.iter().skip(1) {
            for (case, family) in [(PhaseCase::Zero, NoiseFamily::Theta0), (PhaseCase::Pi, NoiseFamily::ThetaPi)] {
                let (tm, _) = transfer_antipt(&p, z, case)?;
                let k = NoiseKernels { family, g_eps: p.g_eps, gamma: p.gamma };
                let total = tm.commutator_matrix() + noise_commutator(&k, z);
                restore = restore.max((total - eta).iter().map(|x| x.norm()).fold(0.0, f64::max));
            }
            bogo = bogo.max(transfer_coherent_theta0(&p, z)?.bogoliubov_defect());
            bogo = bogo.max(transfer_coherent_pi(&p, z)?.bogoliubov_defect());
        }
        Ok(vec![
            Check::below("Wick hafnian vs pairing enumeration (relative)", wick, 1e-12),
            Check::below("anti-PT max |⟨[v, v†]⟩ − η| with noise", restore, 1e-8),
            Check::below("coherent max |m η m† − η|", bogo, 1e-10),
        ])
    }

    fn a10(&self) -> Result<Vec<Check>> {
        let d = WaveguideDesign::paper();
        let period = qpm_period(2.1262, 1.8875, 1550.0 * NM)?;
        let kappa = hopping_rate(205.0 * UM)?;
        let gamma = effective_coupling(76.62 / CM, 813.0 / CM)?;
        let g = nonlinear_g(0.92, 1.11 * UM * UM, 1.8926, 2.1265, 1550.0 * NM, 775.0 * NM, 17.19 * PM_PER_V)?;
        let eps = pump_amplitude(4.0 * MW, 775.4 * NM)?;
        let report = d.report()?;
        let fit = phase_calibration_fit(&synthetic_calibration(1.0, 0.037, 1.2, 0.56, 242.0, 50))?;
        Ok(vec![
            Check::near("poling period (μm)", period / UM, 3.25, 0.01),
            Check::near("κ (cm⁻¹)", per_m_to_per_cm(kappa), 76.62, 0.01),
            Check::near("Γ (cm⁻¹)", per_m_to_per_cm(gamma), 7.22, 0.01),
            Check::near_rel("g (m⁻¹ J^-1/2)", g, 1.08e10, 0.01),
            Check::near_rel("ε (J^1/2)", eps, 6.41e-10, 0.01),
            Check::near_rel("gε (m⁻¹)", g * eps, 6.93, 0.01),
            Check::near_rel("device report gε (m⁻¹)", report.g_eps, 6.93, 0.01),
            Check::near_rel("calibration b (rad/mW)", fit.b, 0.037, 0.01),
            Check::near_rel("calibration θ0 (rad)", fit.theta0, 0.56, 0.01),
        ])
    }

    fn a11(&self) -> Result<Vec<Check>> {
        let gamma = ModelParams::paper().gamma;
        let grid = uniform_grid(10.0 / gamma, 201)?;
        let traj = evolve_classical(gamma, (C64::new(1.0, 0.0), C64::new(0.0, 0.0)), &grid)?;
        let worst = traj
            .z
            .iter()
            .zip(traj.imbalance())
            .filter(|(z, _)| **z >= 5.0 / gamma * (1.0 - 1e-12))
            .map(|(_, x)| x)
            .fold(0.0, f64::max);
        Ok(vec![Check::below("max |P_a − P_b|/(P_a + P_b) for z ≥ 5/Γ", worst, 1e-3)])
    }
}

const DFS_STEP: f64 = 2.5e-6;
const EOM_STEP: f64 = 2.5e-6;
const EOM_POINT: f64 = 2e-3;
const EOM_SPACING: f64 = 2e-5;
/// Step in units of 1/γ_c; well inside the RK4 stability limit of the 2γ_c decay.
const A8_STEP: f64 = 0.25;
const A8_TWO_MODE: Truncation = Truncation { per_mode_cap: 5, total_cap: Some(5), coupler_cap: None };
const A8_THREE_MODE: Truncation = Truncation { per_mode_cap: 5, total_cap: Some(5), coupler_cap: Some(1) };

fn master(p: &ModelParams) -> Result<Trajectory> {
    evolve_master(p, &DensityMatrix::vacuum(p.basis()?))
}

/// |a − b| / max(|a|, |b|), zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn record_fields(r: &CorrelationRecord) -> Vec<f64> {
    let mut v = Vec::with_capacity(17);
    v.extend_from_slice(&r.n);
    v.extend_from_slice(&r.g2);
    v.extend_from_slice(&r.g3);
    v.push(r.g4);
    v.extend_from_slice(&r.n_bright);
    v.extend_from_slice(&r.n_dark);
    v
}

struct BdMoments {
    /// n_Bs, n_Bi, n_Ds, n_Di
    n: [f64; 4],
    bs_bi: C64,
    bs_di: C64,
    ds_bi: C64,
    ds_di: C64,
}

/// Bright/dark operators built directly from the waveguide ladders.
struct BdOperators {
    n: [SparseOperator; 4],
    bs_bi: SparseOperator,
    bs_di: SparseOperator,
    ds_bi: SparseOperator,
    ds_di: SparseOperator,
}

impl BdOperators {
    fn new(basis: &Arc<FockBasis>) -> Result<Self> {
        let lower = |m| ladder(basis, m, LadderKind::Annihilate);
        let (a_s, a_i, b_s, b_i) = (lower(ModeId::AS)?, lower(ModeId::AI)?, lower(ModeId::BS)?, lower(ModeId::BI)?);
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let bright_s = &(&a_s + &b_s) * r;
        let bright_i = &(&a_i + &b_i) * r;
        let dark_s = &(&a_s - &b_s) * r;
        let dark_i = &(&a_i - &b_i) * r;
        let number = |x: &SparseOperator| &x.adjoint() * x;
        Ok(BdOperators {
            n: [number(&bright_s), number(&bright_i), number(&dark_s), number(&dark_i)],
            bs_bi: &bright_s * &bright_i,
            bs_di: &bright_s * &dark_i,
            ds_bi: &dark_s * &bright_i,
            ds_di: &dark_s * &dark_i,
        })
    }

    fn moments(&self, rho: &DMatrix<C64>) -> BdMoments {
        let t = |op: &SparseOperator| op.trace_with(rho);
        BdMoments {
            n: [t(&self.n[0]).re, t(&self.n[1]).re, t(&self.n[2]).re, t(&self.n[3]).re],
            bs_bi: t(&self.bs_bi),
            bs_di: t(&self.bs_di),
            ds_bi: t(&self.ds_bi),
            ds_di: t(&self.ds_di),
        }
    }
}

fn random_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Hermitian N and symmetric M; the Wick expansion is algebraic, so physicality is not needed.
pub fn random_covariance(rng: &mut impl Rng) -> CovarianceState {
    let x = Matrix4::from_fn(|_, _| random_complex(rng));
    let y = Matrix4::from_fn(|_, _| random_complex(rng));
    CovarianceState { n_block: x.adjoint() * x, m_block: y + y.transpose(), z: 0.0 }
}

/// Random normally ordered product of `len` ladder operators on the waveguide modes.
pub fn random_normal_ordered(rng: &mut impl Rng, len: usize) -> Vec<(ModeId, bool)> {
    let creators = rng.gen_range(0..=len);
    (0..len).map(|k| (COV_MODES[rng.gen_range(0..4)], k < creators)).collect()
}

fn contraction(cov: &CovarianceState, x: (ModeId, bool), y: (ModeId, bool)) -> C64 {
    let i = COV_MODES.iter().position(|&m| m == x.0).unwrap();
    let j = COV_MODES.iter().position(|&m| m == y.0).unwrap();
    match (x.1, y.1) {
        (true, true) => cov.m_block[(i, j)].conj(),
        (true, false) => cov.n_block[(i, j)],
        (false, false) => cov.m_block[(i, j)],
        (false, true) => panic!("creator after annihilator"),
    }
}

/// Sum over all perfect matchings, enumerated without memoization.
pub fn brute_force_moment(cov: &CovarianceState, ops: &[(ModeId, bool)]) -> C64 {
    fn go(cov: &CovarianceState, ops: &[(ModeId, bool)], rest: &[usize]) -> C64 {
        if rest.is_empty() {
            return C64::new(1.0, 0.0);
        }
        let first = rest[0];
        let mut total = C64::new(0.0, 0.0);
        for k in 1..rest.len() {
            let remaining: Vec<usize> = rest[1..].iter().copied().filter(|&r| r != rest[k]).collect();
            total += contraction(cov, ops[first], ops[rest[k]]) * go(cov, ops, &remaining);
        }
        total
    }
    let idx: Vec<usize> = (0..ops.len()).collect();
    go(cov, ops, &idx)
}

/// Sum of |terms|, the natural scale for the rounding error of the expansion.
fn brute_force_scale(cov: &CovarianceState, ops: &[(ModeId, bool)]) -> f64 {
    fn go(cov: &CovarianceState, ops: &[(ModeId, bool)], rest: &[usize]) -> f64 {
        if rest.is_empty() {
            return 1.0;
        }
        let first = rest[0];
        (1..rest.len())
            .map(|k| {
                let remaining: Vec<usize> = rest[1..].iter().copied().filter(|&r| r != rest[k]).collect();
                contraction(cov, ops[first], ops[rest[k]]).norm() * go(cov, ops, &remaining)
            })
            .sum()
    }
    let idx: Vec<usize> = (0..ops.len()).collect();
    go(cov, ops, &idx)
}
