//! Hamiltonians and Liouvillians of the coupled-waveguide models.

mod hamiltonians;
mod liouvillian;
mod three_mode;

pub use hamiltonians::{
    build_h_coherent, build_h_eff, build_h_linear_eff, build_h_nl, build_h_nl_bd, build_h_nl_bd_with,
};
pub use liouvillian::{build_liouvillian, jump_term, lindblad_rhs, nhh_rhs, Collapse, Liouvillian};
pub use three_mode::build_three_mode_model;

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fock::{FockBasis, ModeId};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Dissipatively coupled pair, full Lindblad dynamics.
    AntiPtMaster,
    /// Same pair, quantum-jump term dropped.
    AntiPtNhh,
    /// Evanescently (Hermitian) coupled reference pair.
    CoherentHermitian,
    /// Pair plus the lossy coupler guide, before adiabatic elimination.
    ThreeMode,
}

impl Scheme {
    pub fn is_anti_pt(self) -> bool {
        matches!(self, Scheme::AntiPtMaster | Scheme::AntiPtNhh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub per_mode_cap: usize,
    pub total_cap: Option<usize>,
    /// Per-mode cap for the coupler guide; defaults to `per_mode_cap`.
    pub coupler_cap: Option<usize>,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { per_mode_cap: 6, total_cap: Some(6), coupler_cap: None }
    }
}

impl Truncation {
    pub fn total(cap: usize) -> Self {
        Truncation { per_mode_cap: cap, total_cap: Some(cap), coupler_cap: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Pair-generation strength gε (m⁻¹).
    pub g_eps: f64,
    /// Effective dissipative coupling Γ (m⁻¹); for the coherent scheme, the hopping rate.
    pub gamma: f64,
    theta: f64,
    pub scheme: Scheme,
    pub kappa: Option<f64>,
    pub gamma_c: Option<f64>,
    pub truncation: Truncation,
    /// Sample positions (m); the first is 0.
    pub z_grid: Vec<f64>,
}

pub const PAPER_G_EPS: f64 = 6.93;
pub const PAPER_GAMMA: f64 = 722.0;
pub const PAPER_LENGTH: f64 = 4e-3;

impl ModelParams {
    pub fn new(g_eps: f64, gamma: f64, theta: f64, scheme: Scheme) -> Self {
        ModelParams {
            g_eps,
            gamma,
            theta: wrap_phase(theta),
            scheme,
            kappa: None,
            gamma_c: None,
            truncation: Truncation::default(),
            z_grid: uniform_grid(PAPER_LENGTH, 41).expect("static grid"),
        }
    }

    /// gε = 6.93 m⁻¹, Γ = 722 m⁻¹, L = 4 mm, θ = 0, master equation.
    pub fn paper() -> Self {
        Self::new(PAPER_G_EPS, PAPER_GAMMA, 0.0, Scheme::AntiPtMaster)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn set_theta(&mut self, theta: f64) {
        self.theta = wrap_phase(theta);
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.set_theta(theta);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_z_grid(mut self, z_grid: Vec<f64>) -> Self {
        self.z_grid = z_grid;
        self
    }

    /// Switches to the three-mode scheme; Γ is set to the eliminated value κ²/γ_c.
    pub fn with_three_mode(mut self, kappa: f64, gamma_c: f64) -> Self {
        self.scheme = Scheme::ThreeMode;
        self.kappa = Some(kappa);
        self.gamma_c = Some(gamma_c);
        if gamma_c > 0.0 {
            self.gamma = kappa * kappa / gamma_c;
        }
        self
    }

    pub fn length(&self) -> f64 {
        self.z_grid.last().copied().unwrap_or(0.0)
    }

    /// Unbroken anti-PT phase: Γ > 0 at zero detuning, the only case modeled.
    pub fn is_unbroken(&self) -> bool {
        self.gamma > 0.0
    }

    pub fn coefficients(&self) -> NonlinearCoeffs {
        NonlinearCoeffs::from_phase(self.g_eps, self.theta)
    }

    /// Largest rate that sets the integration step.
    pub fn max_rate(&self) -> f64 {
        let mut r = self.gamma.max(self.g_eps);
        if self.scheme == Scheme::ThreeMode {
            r = r.max(self.kappa.unwrap_or(0.0)).max(self.gamma_c.unwrap_or(0.0));
        }
        r
    }

    pub fn modes(&self) -> Vec<ModeId> {
        match self.scheme {
            Scheme::ThreeMode => ModeId::three_mode_modes(),
            _ => ModeId::waveguide_modes(),
        }
    }

    pub fn basis(&self) -> Result<Arc<FockBasis>> {
        let modes = self.modes();
        let t = &self.truncation;
        let caps: Vec<usize> = modes
            .iter()
            .map(|m| match m.guide {
                crate::fock::Waveguide::C => t.coupler_cap.unwrap_or(t.per_mode_cap),
                _ => t.per_mode_cap,
            })
            .collect();
        Ok(Arc::new(FockBasis::with_mode_caps(&modes, &caps, t.total_cap)?))
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |x: f64, name: &str| {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite and nonnegative, got {x}")))
            }
        };
        finite_nonneg(self.g_eps, "g_eps")?;
        finite_nonneg(self.gamma, "Gamma")?;
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        if self.scheme == Scheme::ThreeMode {
            let kappa = self.kappa.ok_or_else(|| Error::invalid("three-mode scheme needs kappa"))?;
            let gamma_c = self.gamma_c.ok_or_else(|| Error::invalid("three-mode scheme needs gamma_c"))?;
            finite_nonneg(kappa, "kappa")?;
            if !(gamma_c.is_finite() && gamma_c > 0.0) {
                return Err(Error::invalid(format!("gamma_c must be positive, got {gamma_c}")));
            }
            if kappa > 0.0 && gamma_c / kappa < 5.0 {
                log::warn!("gamma_c/kappa = {:.2} < 5: adiabatic elimination is questionable", gamma_c / kappa);
            }
        }
        validate_grid(&self.z_grid)
    }
}

pub fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// `samples` evenly spaced positions from 0 to `length` inclusive.
pub fn uniform_grid(length: f64, samples: usize) -> Result<Vec<f64>> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::invalid(format!("length must be positive, got {length}")));
    }
    if samples < 2 {
        return Err(Error::invalid("a z grid needs at least two samples"));
    }
    let n = samples - 1;
    Ok((0..=n).map(|k| length * k as f64 / n as f64).collect())
}

pub fn validate_grid(z: &[f64]) -> Result<()> {
    match z.first() {
        None => return Err(Error::invalid("empty z grid")),
        Some(&z0) if z0 != 0.0 => return Err(Error::invalid("z grid must start at 0")),
        _ => {}
    }
    if z.iter().any(|v| !v.is_finite()) || z.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("z grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// Co- and cross-generation amplitudes of the pair Hamiltonian in the
/// bright/dark basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearCoeffs {
    pub lambda_co: C64,
    pub lambda_x: C64,
}

impl NonlinearCoeffs {
    /// Λ_co = (gε/2)(e^{iθ}+1), Λ_x = (gε/2)(e^{iθ}−1).
    pub fn from_phase(g_eps: f64, theta: f64) -> Self {
        let e = C64::from_polar(1.0, theta);
        let h = 0.5 * g_eps;
        NonlinearCoeffs { lambda_co: (e + 1.0) * h, lambda_x: (e - 1.0) * h }
    }

    /// The variant with Λ_co = gε e^{iθ} cos(θ/2) and Λ_x = i gε e^{iθ} sin(θ/2),
    /// kept for comparison only; it does not reproduce the waveguide Hamiltonian.
    pub fn alternative_phase_form(g_eps: f64, theta: f64) -> Self {
        let e = C64::from_polar(g_eps, theta);
        NonlinearCoeffs {
            lambda_co: e * (0.5 * theta).cos(),
            lambda_x: e * C64::new(0.0, (0.5 * theta).sin()),
        }
    }
}
