//! Chip-design and calibration calculators. All quantities are SI.

mod calibration;
mod grid;

pub use calibration::{phase_calibration_fit, synthetic_calibration, CalibrationFit, CalibrationSample, MIN_SAMPLES};
pub use grid::{overlap_and_area, FieldGrid};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_8128e-12;

fn positive(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {x}")))
    }
}

fn nonnegative(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be nonnegative, got {x}")))
    }
}

/// First-order QPM period Λ = λ_fund / (2(n_pump − n_fund)) for a pump at λ_fund/2.
pub fn qpm_period(n_pump: f64, n_fund: f64, lambda_fund: f64) -> Result<f64> {
    positive(lambda_fund, "lambda_fund")?;
    if !(n_pump > n_fund) {
        return Err(Error::NoPhaseMatching { n_pump, n_fund });
    }
    Ok(lambda_fund / (2.0 * (n_pump - n_fund)))
}

/// Δk = 2π n_pump/λ_pump − 4π n_fund/λ_fund − 2π/Λ with λ_pump = λ_fund/2.
pub fn phase_mismatch(n_pump: f64, n_fund: f64, lambda_fund: f64, period: f64) -> f64 {
    2.0 * PI * n_pump / (0.5 * lambda_fund) - 4.0 * PI * n_fund / lambda_fund - 2.0 * PI / period
}

/// κ = π / (2 L_beat).
pub fn hopping_rate(l_beat: f64) -> Result<f64> {
    positive(l_beat, "L_beat")?;
    Ok(PI / (2.0 * l_beat))
}

/// Γ = |κ|² / γ.
pub fn effective_coupling(kappa: f64, gamma_c: f64) -> Result<f64> {
    positive(gamma_c, "gamma_c")?;
    if !kappa.is_finite() {
        return Err(Error::invalid("kappa must be finite"));
    }
    Ok(kappa * kappa / gamma_c)
}

/// g = √(16π³ / (ε₀ n_ω⁴ n_2ω² λ_ω² λ_2ω)) · d_eff ζ / √A_eff, in m⁻¹ J^(−1/2).
pub fn nonlinear_g(
    zeta: f64,
    a_eff: f64,
    n_omega: f64,
    n_2omega: f64,
    lambda_omega: f64,
    lambda_2omega: f64,
    d_eff: f64,
) -> Result<f64> {
    nonnegative(zeta, "zeta")?;
    nonnegative(d_eff, "d_eff")?;
    positive(a_eff, "A_eff")?;
    positive(n_omega, "n_omega")?;
    positive(n_2omega, "n_2omega")?;
    positive(lambda_omega, "lambda_omega")?;
    positive(lambda_2omega, "lambda_2omega")?;
    let pre = 16.0 * PI.powi(3)
        / (VACUUM_PERMITTIVITY * n_omega.powi(4) * n_2omega.powi(2) * lambda_omega.powi(2) * lambda_2omega);
    Ok(pre.sqrt() * d_eff * zeta / a_eff.sqrt())
}

/// Classical pump amplitude ε = √(λ_2ω P / (8πc)), in J^(1/2).
pub fn pump_amplitude(power: f64, lambda_2omega: f64) -> Result<f64> {
    nonnegative(power, "pump power")?;
    positive(lambda_2omega, "lambda_2omega")?;
    Ok((lambda_2omega * power / (8.0 * PI * SPEED_OF_LIGHT)).sqrt())
}

/// g_exp = √((P_2ω(L)/P_ω(0)) · 2πcλ_2ω / (L² λ_ω²)), evaluated as written.
pub fn g_exp_from_shg(p_fund_in: f64, p_shg_out: f64, length: f64, lambda_omega: f64, lambda_2omega: f64) -> Result<f64> {
    positive(p_fund_in, "P_omega(0)")?;
    nonnegative(p_shg_out, "P_2omega(L)")?;
    positive(length, "L")?;
    positive(lambda_omega, "lambda_omega")?;
    positive(lambda_2omega, "lambda_2omega")?;
    Ok((p_shg_out / p_fund_in * 2.0 * PI * SPEED_OF_LIGHT * lambda_2omega / (length * length * lambda_omega * lambda_omega))
        .sqrt())
}

/// g⁽⁴⁾_exp = C₄ / (R₁R₂R₃R₄ · T · Δτ₁Δτ₂Δτ₃).
pub fn g4_exp_normalization(c4: f64, rates: [f64; 4], duration: f64, windows: [f64; 3]) -> Result<f64> {
    nonnegative(c4, "C4")?;
    for (k, r) in rates.iter().enumerate() {
        positive(*r, &format!("R{}", k + 1))?;
    }
    positive(duration, "T")?;
    for (k, w) in windows.iter().enumerate() {
        positive(*w, &format!("window {}", k + 1))?;
    }
    Ok(c4 / (rates.iter().product::<f64>() * duration * windows.iter().product::<f64>()))
}

/// Device inputs from mode solving and characterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideDesign {
    /// Effective index at the pump (2ω) used for phase matching.
    pub n_pump: f64,
    /// Effective index at the fundamental used for phase matching.
    pub n_fund: f64,
    pub lambda_fund: f64,
    pub lambda_pump: f64,
    pub l_beat: f64,
    pub gamma_c: f64,
    pub d_eff: f64,
    pub zeta: f64,
    pub a_eff: f64,
    /// Indices entering the conversion coefficient.
    pub n_omega: f64,
    pub n_2omega: f64,
    pub pump_power: f64,
}

impl WaveguideDesign {
    /// Thin-film lithium niobate triple-guide device at 1550/775 nm.
    pub fn paper() -> Self {
        WaveguideDesign {
            n_pump: 2.1262,
            n_fund: 1.8875,
            lambda_fund: 1550e-9,
            lambda_pump: 775.4e-9,
            l_beat: 205e-6,
            gamma_c: 813e2,
            d_eff: 17.19e-12,
            zeta: 0.92,
            a_eff: 1.11e-12,
            n_omega: 1.8926,
            n_2omega: 2.1265,
            pump_power: 4e-3,
        }
    }

    pub fn report(&self) -> Result<DesignReport> {
        let poling_period = qpm_period(self.n_pump, self.n_fund, self.lambda_fund)?;
        let kappa = hopping_rate(self.l_beat)?;
        let gamma = effective_coupling(kappa, self.gamma_c)?;
        let g = nonlinear_g(
            self.zeta,
            self.a_eff,
            self.n_omega,
            self.n_2omega,
            self.lambda_fund,
            0.5 * self.lambda_fund,
            self.d_eff,
        )?;
        let epsilon = pump_amplitude(self.pump_power, self.lambda_pump)?;
        Ok(DesignReport { poling_period, kappa, gamma, g, epsilon, g_eps: g * epsilon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    /// m
    pub poling_period: f64,
    /// m⁻¹
    pub kappa: f64,
    /// m⁻¹
    pub gamma: f64,
    /// m⁻¹ J^(−1/2)
    pub g: f64,
    /// J^(1/2)
    pub epsilon: f64,
    /// m⁻¹
    pub g_eps: f64,
}
