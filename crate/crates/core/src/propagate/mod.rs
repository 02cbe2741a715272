//! z-propagation: master equation, non-Hermitian Schrödinger equation and the
//! classical coupled-amplitude limit.

mod classical;
mod master;
mod nhh;

pub use classical::{evolve_classical, ClassicalTrajectory};
pub use master::{evolve_master, evolve_master_with, MasterOptions};
pub use nhh::{evolve_nhh, evolve_nhh_with, NhhOptions};

use serde::{Deserialize, Serialize};

use crate::fock::{DensityMatrix, StateVector};
use crate::model::{ModelParams, Scheme};
use crate::observables::CorrelationRecord;
use crate::{Error, Result};

/// Health of the state at one recorded sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    pub z: f64,
    pub trace: f64,
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue over all blocks; NaN when not checked.
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub enum RecordedState {
    Mixed(DensityMatrix),
    Pure(StateVector),
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub params: ModelParams,
    pub z: Vec<f64>,
    pub records: Vec<CorrelationRecord>,
    /// Full states, only when requested.
    pub states: Vec<RecordedState>,
    pub diagnostics: Vec<SampleDiagnostics>,
    /// Largest step actually taken (m).
    pub step: f64,
}

impl Trajectory {
    pub fn endpoint(&self) -> &CorrelationRecord {
        self.records.last().expect("trajectories hold at least the initial sample")
    }

    pub fn g4_curve(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.g4).collect()
    }
}

/// h = min(1/(40·max rate), L/400) unless overridden.
pub fn default_step(params: &ModelParams) -> f64 {
    let rate = params.max_rate();
    let l = params.length();
    let by_rate = if rate > 0.0 { 1.0 / (40.0 * rate) } else { f64::INFINITY };
    let by_len = if l > 0.0 { l / 400.0 } else { f64::INFINITY };
    let h = by_rate.min(by_len);
    if h.is_finite() {
        h
    } else {
        1.0
    }
}

pub(crate) fn resolve_step(params: &ModelParams, step: Option<f64>) -> Result<f64> {
    match step {
        None => Ok(default_step(params)),
        Some(h) if h.is_finite() && h > 0.0 => Ok(h),
        Some(h) => Err(Error::invalid(format!("step must be positive, got {h}"))),
    }
}

/// Number of equal substeps covering `dz` with steps no longer than `h`.
pub fn substeps(dz: f64, h: f64) -> usize {
    ((dz / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}
