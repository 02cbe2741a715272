use std::f64::consts::{PI, TAU};

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{DVector, Dyn, Matrix3, OMatrix, Owned, Vector3, Vector4, U4};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One heater setting and the two output powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    /// mW
    pub heater_mw: f64,
    /// W
    pub p_a: f64,
    /// W
    pub p_b: f64,
}

/// Fit of P_a = a cos(b P + θ₀) + c, P_b = c − a cos(b P + θ₀).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFit {
    pub a: f64,
    /// rad/mW
    pub b: f64,
    pub c: f64,
    /// rad, in [0, 2π)
    pub theta0: f64,
    /// RMS residual over both outputs (W).
    pub residual: f64,
    pub evaluations: usize,
}

impl CalibrationFit {
    pub fn phase_at(&self, heater_mw: f64) -> f64 {
        self.b * heater_mw + self.theta0
    }

    pub fn predict(&self, heater_mw: f64) -> (f64, f64) {
        let cos = self.phase_at(heater_mw).cos();
        (self.a * cos + self.c, self.c - self.a * cos)
    }
}

pub const MIN_SAMPLES: usize = 8;

/// Noiseless samples from the fit model on a uniform heater grid.
pub fn synthetic_calibration(a: f64, b: f64, c: f64, theta0: f64, p_max: f64, count: usize) -> Vec<CalibrationSample> {
    (0..count)
        .map(|k| {
            let p = if count > 1 { p_max * k as f64 / (count - 1) as f64 } else { 0.0 };
            let cos = (b * p + theta0).cos();
            CalibrationSample { heater_mw: p, p_a: a * cos + c, p_b: c - a * cos }
        })
        .collect()
}

struct Problem<'a> {
    samples: &'a [CalibrationSample],
    p: Vector4<f64>,
}

impl LeastSquaresProblem<f64, Dyn, U4> for Problem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U4>;
    type ParameterStorage = Owned<f64, U4>;

    fn set_params(&mut self, p: &Vector4<f64>) {
        self.p.copy_from(p);
    }

    fn params(&self) -> Vector4<f64> {
        self.p
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let [a, b, c, t] = [self.p[0], self.p[1], self.p[2], self.p[3]];
        let n = self.samples.len();
        let mut r = DVector::zeros(2 * n);
        for (k, s) in self.samples.iter().enumerate() {
            let cos = (b * s.heater_mw + t).cos();
            r[k] = a * cos + c - s.p_a;
            r[n + k] = c - a * cos - s.p_b;
        }
        Some(r)
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U4>> {
        let [a, b, _, t] = [self.p[0], self.p[1], self.p[2], self.p[3]];
        let n = self.samples.len();
        let mut j = OMatrix::<f64, Dyn, U4>::zeros(2 * n);
        for (k, s) in self.samples.iter().enumerate() {
            let x = s.heater_mw;
            let (sin, cos) = (b * x + t).sin_cos();
            let row = [cos, -a * x * sin, 1.0, -a * sin];
            for (col, v) in row.into_iter().enumerate() {
                j[(k, col)] = v;
                j[(n + k, col)] = if col == 2 { 1.0 } else { -v };
            }
        }
        Some(j)
    }
}

/// Linear least squares of d ≈ α cos(bx) + β sin(bx) + γ at fixed b; returns (α, β, γ, SSR).
fn linear_fit(xs: &[f64], ds: &[f64], b: f64) -> Option<(f64, f64, f64, f64)> {
    let mut ata = Matrix3::zeros();
    let mut atd = Vector3::zeros();
    for (&x, &d) in xs.iter().zip(ds) {
        let (s, c) = (b * x).sin_cos();
        let row = Vector3::new(c, s, 1.0);
        ata += row * row.transpose();
        atd += row * d;
    }
    let sol = ata.cholesky()?.solve(&atd);
    let ssr = xs
        .iter()
        .zip(ds)
        .map(|(&x, &d)| {
            let (s, c) = (b * x).sin_cos();
            (sol[0] * c + sol[1] * s + sol[2] - d).powi(2)
        })
        .sum();
    Some((sol[0], sol[1], sol[2], ssr))
}

/// Frequency scan of the half-difference signal; returns (a, b, θ₀) at the best frequency.
fn initial_guess(samples: &[CalibrationSample]) -> Result<(f64, f64, f64)> {
    let xs: Vec<f64> = samples.iter().map(|s| s.heater_mw).collect();
    let ds: Vec<f64> = samples.iter().map(|s| 0.5 * (s.p_a - s.p_b)).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let span = hi - lo;
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let min_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !(span > 0.0) || !min_gap.is_finite() {
        return Err(Error::FitDegenerate("heater powers do not vary".into()));
    }
    let b_min = 0.5 * PI / span;
    let b_max = PI / min_gap;
    let steps = 4000;
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for k in 0..=steps {
        // geometric spacing keeps resolution proportional to the frequency
        let b = b_min * (b_max / b_min).powf(k as f64 / steps as f64);
        if let Some((al, be, _, ssr)) = linear_fit(&xs, &ds, b) {
            if best.map_or(true, |(.., s)| ssr < s) {
                best = Some((al, be, b, ssr));
            }
        }
    }
    let (al, be, b, _) = best.ok_or_else(|| Error::FitDegenerate("frequency scan failed".into()))?;
    // α cos + β sin = a cos(bx + θ₀) with a cos θ₀ = α, a sin θ₀ = −β
    Ok((al.hypot(be), b, (-be).atan2(al)))
}

fn canonical(mut a: f64, mut b: f64, mut theta0: f64) -> (f64, f64, f64) {
    if b < 0.0 {
        b = -b;
        theta0 = -theta0;
    }
    if a < 0.0 {
        a = -a;
        theta0 += PI;
    }
    theta0 = theta0.rem_euclid(TAU);
    if theta0 >= TAU {
        theta0 = 0.0;
    }
    (a, b, theta0)
}

/// Fits the complementary heater-scan curves for a, b, c and θ₀.
pub fn phase_calibration_fit(samples: &[CalibrationSample]) -> Result<CalibrationFit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::FitDegenerate(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|s| !(s.heater_mw.is_finite() && s.p_a.is_finite() && s.p_b.is_finite())) {
        return Err(Error::Data("non-finite calibration sample".into()));
    }
    let mean_d = samples.iter().map(|s| 0.5 * (s.p_a - s.p_b)).sum::<f64>() / samples.len() as f64;
    let scale = samples.iter().map(|s| s.p_a.abs().max(s.p_b.abs())).fold(0.0, f64::max);
    let spread = samples
        .iter()
        .map(|s| (0.5 * (s.p_a - s.p_b) - mean_d).abs())
        .fold(0.0, f64::max);
    if spread <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::FitDegenerate("output powers do not vary with heater power".into()));
    }

    let (a0, b0, t0) = initial_guess(samples)?;
    let c0 = samples.iter().map(|s| 0.5 * (s.p_a + s.p_b)).sum::<f64>() / samples.len() as f64;
    let problem = Problem { samples, p: Vector4::new(a0, b0, c0, t0) };
    let (problem, report) = LevenbergMarquardt::new().minimize(problem);
    if !report.termination.was_successful() {
        return Err(Error::FitDegenerate(format!("least squares did not converge: {:?}", report.termination)));
    }
    let p = problem.params();
    if !p.iter().all(|v| v.is_finite()) {
        return Err(Error::FitDegenerate("fit produced non-finite parameters".into()));
    }
    let (a, b, theta0) = canonical(p[0], p[1], p[3]);
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| (l.min(s.heater_mw), h.max(s.heater_mw)));
    if b * (hi - lo) <= PI {
        return Err(Error::FitDegenerate(format!(
            "scan covers only {:.3} rad of phase; at least π is needed",
            b * (hi - lo)
        )));
    }
    let residual = (2.0 * report.objective_function / (2 * samples.len()) as f64).sqrt();
    Ok(CalibrationFit { a, b, c: p[2], theta0, residual, evaluations: report.number_of_evaluations })
}
