use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::model::validate_grid;
use crate::{Error, Result};

/// Classical field amplitudes of the two guides at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTrajectory {
    pub z: Vec<f64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl ClassicalTrajectory {
    pub fn power_a(&self) -> Vec<f64> {
        self.a.iter().map(|x| x.norm_sqr()).collect()
    }

    pub fn power_b(&self) -> Vec<f64> {
        self.b.iter().map(|x| x.norm_sqr()).collect()
    }

    /// |P_a − P_b| / (P_a + P_b) per sample.
    pub fn imbalance(&self) -> Vec<f64> {
        self.power_a()
            .iter()
            .zip(self.power_b())
            .map(|(pa, pb)| if pa + pb > 0.0 { (pa - pb).abs() / (pa + pb) } else { 0.0 })
            .collect()
    }
}

/// Closed-form solution of d(a, b)/dz = −Γ(a + b, a + b).
///
/// The sum decays as e^{−2Γz} while the difference a − b is conserved.
pub fn evolve_classical(gamma: f64, amplitudes0: (C64, C64), z_grid: &[f64]) -> Result<ClassicalTrajectory> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::invalid(format!("Gamma must be nonnegative, got {gamma}")));
    }
    validate_grid(z_grid)?;
    let (a0, b0) = amplitudes0;
    let s = a0 + b0;
    let mut a = Vec::with_capacity(z_grid.len());
    let mut b = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let lost = s * (0.5 * -(-2.0 * gamma * z).exp_m1());
        a.push(a0 - lost);
        b.push(b0 - lost);
    }
    Ok(ClassicalTrajectory { z: z_grid.to_vec(), a, b })
}
