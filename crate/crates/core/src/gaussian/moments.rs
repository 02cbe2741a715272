use nalgebra::Matrix4;

use super::CovarianceState;
use crate::model::{validate_grid, ModelParams, Scheme};
use crate::propagate::substeps;
use crate::{Error, Result, C64};

/// Drift of the normally ordered moments for H = Σ h_ij v_i†v_j + ½Σ(p_ij v_i†v_j† + h.c.)
/// and collapse operators L_k = Σ_j l_kj v_j (vacuum reservoirs):
///   dN/dz = X̄N + NXᵀ + ȲM + M̄Yᵀ,
///   dM/dz = XM + MXᵀ + YN + (YN)ᵀ + Y,
/// with X = −ih − ½ Σ_k l̄_k l_kᵀ and Y = −ip.
struct Drift {
    x: Matrix4<C64>,
    y: Matrix4<C64>,
}

impl Drift {
    fn new(params: &ModelParams) -> Result<Self> {
        let (g, gm) = (params.g_eps, params.gamma);
        let mut h = Matrix4::<C64>::zeros();
        let mut p = Matrix4::<C64>::zeros();
        let mut ll = Matrix4::<C64>::zeros();
        // Covariance order: a_s, b_s, a_i, b_i.
        let ga = C64::from_polar(g, params.theta());
        p[(0, 2)] = ga;
        p[(2, 0)] = ga;
        p[(1, 3)] = C64::new(g, 0.0);
        p[(3, 1)] = C64::new(g, 0.0);
        match params.scheme {
            Scheme::AntiPtMaster | Scheme::AntiPtNhh => {
                // 2Γ D[a_μ + b_μ]
                for (i, j) in [(0, 1), (2, 3)] {
                    for r in [i, j] {
                        for s in [i, j] {
                            ll[(r, s)] = C64::new(2.0 * gm, 0.0);
                        }
                    }
                }
            }
            Scheme::CoherentHermitian => {
                for (i, j) in [(0, 1), (2, 3)] {
                    h[(i, j)] = C64::new(gm, 0.0);
                    h[(j, i)] = C64::new(gm, 0.0);
                }
            }
            Scheme::ThreeMode => {
                return Err(Error::invalid("the moment engine covers the two-guide schemes only"));
            }
        }
        let minus_i = C64::new(0.0, -1.0);
        Ok(Drift { x: h * minus_i - ll * C64::new(0.5, 0.0), y: p * minus_i })
    }

    fn rhs(&self, n: &Matrix4<C64>, m: &Matrix4<C64>) -> (Matrix4<C64>, Matrix4<C64>) {
        let (x, y) = (&self.x, &self.y);
        let dn = x.conjugate() * n + n * x.transpose() + y.conjugate() * m + m.conjugate() * y.transpose();
        let yn = y * n;
        let dm = x * m + m * x.transpose() + yn + yn.transpose() + y;
        (dn, dm)
    }
}

/// Second moments on `z_grid` from the vacuum, any θ.
///
/// The dynamics is quadratic, so the state stays Gaussian and these moments
/// determine every correlator through [`super::wick_moment`].
pub fn moment_ode(params: &ModelParams, z_grid: &[f64]) -> Result<Vec<CovarianceState>> {
    let rate = params.gamma.max(params.g_eps);
    let h = if rate > 0.0 { 1.0 / (400.0 * rate) } else { z_grid.last().copied().unwrap_or(1.0).max(1e-300) };
    moment_ode_with_step(params, z_grid, h)
}

pub fn moment_ode_with_step(params: &ModelParams, z_grid: &[f64], h: f64) -> Result<Vec<CovarianceState>> {
    validate_grid(z_grid)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    let drift = Drift::new(params)?;
    let mut n = Matrix4::<C64>::zeros();
    let mut m = Matrix4::<C64>::zeros();
    let mut out = Vec::with_capacity(z_grid.len());
    let mut z = 0.0;
    for &zs in z_grid {
        if zs > z {
            let steps = substeps(zs - z, h);
            let dz = (zs - z) / steps as f64;
            let half = C64::new(0.5 * dz, 0.0);
            let full = C64::new(dz, 0.0);
            let sixth = C64::new(dz / 6.0, 0.0);
            let two = C64::new(2.0, 0.0);
            for _ in 0..steps {
                let k1 = drift.rhs(&n, &m);
                let k2 = drift.rhs(&(n + k1.0 * half), &(m + k1.1 * half));
                let k3 = drift.rhs(&(n + k2.0 * half), &(m + k2.1 * half));
                let k4 = drift.rhs(&(n + k3.0 * full), &(m + k3.1 * full));
                n += (k1.0 + k4.0 + (k2.0 + k3.0) * two) * sixth;
                m += (k1.1 + k4.1 + (k2.1 + k3.1) * two) * sixth;
            }
            z = zs;
        }
        if n.iter().chain(m.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::numerical(zs, "moment equations diverged"));
        }
        out.push(CovarianceState { n_block: n, m_block: m, z: zs });
    }
    Ok(out)
}
