use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{correlation_record, CorrelationRecord};
use crate::fock::{DensityMatrix, StateVector};
use crate::gaussian::moment_ode;
use crate::model::{ModelParams, Scheme};
use crate::propagate::{evolve_master_with, evolve_nhh_with, MasterOptions, NhhOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Engine {
    /// Lindblad master equation for the template scheme.
    Master,
    /// Non-Hermitian Schrödinger equation of the anti-PT pair.
    Nhh,
    /// Second-moment ODE plus Wick expansion.
    Gaussian,
    /// Master equation of the Hermitian coherent reference.
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub master: MasterOptions,
    pub nhh: NhhOptions,
}

/// Endpoint record (z = L) of one engine at the template's θ.
pub fn endpoint_record(params: &ModelParams, engine: Engine, opts: &SweepOptions) -> Result<CorrelationRecord> {
    let theta = params.theta();
    match engine {
        Engine::Master | Engine::Coherent => {
            let mut p = params.clone();
            p.scheme = match (engine, p.scheme) {
                (Engine::Coherent, _) => Scheme::CoherentHermitian,
                (_, Scheme::AntiPtNhh) => Scheme::AntiPtMaster,
                (_, s) => s,
            };
            let rho0 = DensityMatrix::vacuum(p.basis()?);
            Ok(evolve_master_with(&p, &rho0, &opts.master)?.endpoint().clone())
        }
        Engine::Nhh => {
            let p = params.clone().with_scheme(Scheme::AntiPtNhh);
            let psi0 = StateVector::vacuum(p.basis()?);
            Ok(evolve_nhh_with(&p, &psi0, &opts.nhh)?.endpoint().clone())
        }
        Engine::Gaussian => {
            params.validate()?;
            let l = params.length();
            let grid = if l > 0.0 { vec![0.0, l] } else { vec![0.0] };
            let cov = moment_ode(params, &grid)?;
            correlation_record(cov.last().unwrap(), l, theta)
        }
    }
}

/// One independent result per θ, in grid order (sorted by θ).
pub fn sweep_phase_points(
    template: &ModelParams,
    theta_grid: &[f64],
    engine: Engine,
    opts: &SweepOptions,
) -> Result<Vec<(f64, Result<CorrelationRecord>)>> {
    if theta_grid.is_empty() {
        return Err(Error::invalid("empty theta grid"));
    }
    if let Some(t) = theta_grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::invalid(format!("non-finite theta {t}")));
    }
    let mut grid = theta_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let run = |&theta: &f64| {
        let p = template.clone().with_theta(theta);
        let r = endpoint_record(&p, engine, opts)
            .map(|mut rec| {
                rec.theta = theta;
                rec
            })
            .map_err(|e| Error::AtPhase { theta, source: Box::new(e) });
        (theta, r)
    };
    let out = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
            .install(|| grid.par_iter().map(run).collect()),
        None => grid.par_iter().map(run).collect(),
    };
    Ok(out)
}

/// Correlation records over a θ grid; the first failing point aborts the sweep.
pub fn sweep_phase(template: &ModelParams, theta_grid: &[f64], engine: Engine) -> Result<Vec<CorrelationRecord>> {
    sweep_phase_points(template, theta_grid, engine, &SweepOptions::default())?
        .into_iter()
        .map(|(_, r)| r)
        .collect()
}

/// `n` uniform points over [0, 2π] inclusive.
pub fn theta_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|k| std::f64::consts::TAU * k as f64 / (n - 1) as f64).collect()
}
