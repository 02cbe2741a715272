use nalgebra::Matrix4;

use super::closed_form::{antipt_pi_noise_photons, antipt_theta0_noise_photons};
use super::quad::adaptive_simpson;
use super::{CovarianceState, Family, TransferMatrix};
use crate::model::ModelParams;
use crate::{Error, Result, C64};

const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseCase {
    Zero,
    Pi,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Coherent pair at θ = 0; needs Γ > gε.
pub fn transfer_coherent_theta0(params: &ModelParams, z: f64) -> Result<TransferMatrix> {
    let (g, gm) = (params.g_eps, params.gamma);
    if gm <= g {
        return Err(Error::Regime(format!("the θ = 0 coherent solution needs Γ > gε (Γ = {gm}, gε = {g})")));
    }
    let om = (gm * gm - g * g).sqrt();
    let s = (om * z).sin();
    let u = c((om * z).cos(), 0.0);
    let v = c(0.0, -gm / om * s);
    let w = c(0.0, -g / om * s);
    let o = c(0.0, 0.0);
    #[rustfmt::skip]
    let m = Matrix4::new(
        u, v, w, o,
        v, u, o, w,
        -w, o, u, -v,
        o, -w, -v, u,
    );
    Ok(TransferMatrix { m, z, family: Family::M1 })
}

/// Coherent pair at θ = π (Λ_co = 0, Λ_x = −gε).
pub fn transfer_coherent_pi(params: &ModelParams, z: f64) -> Result<TransferMatrix> {
    let (g, gm) = (params.g_eps, params.gamma);
    let (ch, sh) = ((g * z).cosh(), (g * z).sinh());
    let (cg, sg) = ((gm * z).cos(), (gm * z).sin());
    let (cc, cs, sc, ss) = (ch * cg, ch * sg, sh * cg, sh * sg);
    #[rustfmt::skip]
    let m = Matrix4::new(
        c(cc, 0.0),  c(0.0, -cs), c(0.0, sc),  c(-ss, 0.0),
        c(0.0, -cs), c(cc, 0.0),  c(ss, 0.0),  c(0.0, -sc),
        c(0.0, -sc), c(-ss, 0.0), c(cc, 0.0),  c(0.0, cs),
        c(ss, 0.0),  c(0.0, sc),  c(0.0, cs),  c(cc, 0.0),
    );
    Ok(TransferMatrix { m, z, family: Family::M2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    Theta0,
    ThetaPi,
}

/// Kernels of the noise operators
/// F_{x_s} = √Γ ∫ [K0 A_s + i c_x K1 A_i†],  F_{x_i} = √Γ ∫ [K0 A_i + i c'_x K1 A_s†],
/// with A_μ = a_{μ,in} + b_{μ,in} and x ∈ {a, b}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseKernels {
    pub family: NoiseFamily,
    pub g_eps: f64,
    pub gamma: f64,
}

impl NoiseKernels {
    pub fn k0(&self, xi: f64) -> f64 {
        let (g, gm) = (self.g_eps, self.gamma);
        match self.family {
            NoiseFamily::Theta0 => (-2.0 * gm * xi).exp() * (g * xi).cosh(),
            NoiseFamily::ThetaPi => {
                let k = gm.hypot(g);
                (-gm * xi).exp() * ((k * xi).cosh() - gm / k * (k * xi).sinh())
            }
        }
    }

    pub fn k1(&self, xi: f64) -> f64 {
        let (g, gm) = (self.g_eps, self.gamma);
        match self.family {
            NoiseFamily::Theta0 => (-2.0 * gm * xi).exp() * (g * xi).sinh(),
            NoiseFamily::ThetaPi => {
                let k = gm.hypot(g);
                (-gm * xi).exp() * g / k * (k * xi).sinh()
            }
        }
    }

    /// Signs (c_a, c_b) of the K1 term in the signal noise operators.
    pub fn signal_signs(&self) -> [f64; 2] {
        match self.family {
            NoiseFamily::Theta0 => [-1.0, -1.0],
            NoiseFamily::ThetaPi => [1.0, -1.0],
        }
    }

    /// Signs (c'_a, c'_b) of the K1 term in the idler noise operators.
    pub fn idler_signs(&self) -> [f64; 2] {
        self.signal_signs()
    }

    /// ∫₀^z f(ξ) dξ by adaptive Simpson in the scaled variable Γξ.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, z: f64) -> f64 {
        let gm = self.gamma;
        adaptive_simpson(&|t: f64| f(t / gm), 0.0, gm * z, QUAD_TOL) / gm
    }

    /// ⟨F_{x_s}† F_{x_s}⟩ = 2Γ ∫ K1², in closed form.
    pub fn noise_photons(&self, z: f64) -> f64 {
        match self.family {
            NoiseFamily::Theta0 => antipt_theta0_noise_photons(self.g_eps, self.gamma, z),
            NoiseFamily::ThetaPi => antipt_pi_noise_photons(self.g_eps, self.gamma, z),
        }
    }

    /// Second moments of the noise vector, ordered like the covariance blocks.
    pub fn covariance(&self, z: f64) -> CovarianceState {
        let nvac = self.noise_photons(z);
        let i01 = self.integrate(|x| self.k0(x) * self.k1(x), z);
        let two_g = 2.0 * self.gamma;
        let (cs, ci) = (self.signal_signs(), self.idler_signs());
        let mut n = Matrix4::<C64>::zeros();
        let mut m = Matrix4::<C64>::zeros();
        // Signal modes sit at covariance indices 0, 1 (a, b); idler at 2, 3.
        for x in 0..2 {
            for y in 0..2 {
                n[(x, y)] = c(cs[x] * cs[y] * nvac, 0.0);
                n[(x + 2, y + 2)] = c(ci[x] * ci[y] * nvac, 0.0);
                // ⟨F_{x_s} F_{y_i}⟩ and ⟨F_{y_i} F_{x_s}⟩
                m[(x, y + 2)] = c(0.0, two_g * ci[y] * i01);
                m[(y + 2, x)] = c(0.0, two_g * cs[x] * i01);
            }
        }
        CovarianceState { n_block: n, m_block: m, z }
    }
}

/// ⟨[F_r, F_t†]⟩ over the operator vector [F_{a_s}, F_{b_s}, F_{a_i}†, F_{b_i}†].
pub fn noise_commutator(kernels: &NoiseKernels, z: f64) -> Matrix4<C64> {
    let i00 = kernels.integrate(|x| kernels.k0(x).powi(2), z);
    let i11 = kernels.integrate(|x| kernels.k1(x).powi(2), z);
    let i01 = kernels.integrate(|x| kernels.k0(x) * kernels.k1(x), z);
    let two_g = 2.0 * kernels.gamma;
    let (cs, ci) = (kernels.signal_signs(), kernels.idler_signs());
    let mut out = Matrix4::<C64>::zeros();
    for x in 0..2 {
        for y in 0..2 {
            out[(x, y)] = c(two_g * (i00 - cs[x] * cs[y] * i11), 0.0);
            out[(x + 2, y + 2)] = c(-two_g * (i00 - ci[x] * ci[y] * i11), 0.0);
            out[(x, y + 2)] = c(0.0, two_g * i01 * (ci[y] - cs[x]));
            out[(x + 2, y)] = c(0.0, -two_g * i01 * (ci[x] - cs[y]));
        }
    }
    out
}

/// Anti-PT transfer matrix at θ ∈ {0, π} and the additive vacuum-noise moments.
pub fn transfer_antipt(params: &ModelParams, z: f64, case: PhaseCase) -> Result<(TransferMatrix, CovarianceState)> {
    let (g, gm) = (params.g_eps, params.gamma);
    if !(gm > 0.0) {
        return Err(Error::Regime(format!("the anti-PT solution needs Γ > 0, got {gm}")));
    }
    let (tm, family) = match case {
        PhaseCase::Zero => {
            let e = (-2.0 * gm * z).exp();
            let (ch, sh) = (0.5 * (g * z).cosh(), 0.5 * (g * z).sinh());
            let (p, q) = (1.0 + e, -(-2.0 * gm * z).exp_m1());
            #[rustfmt::skip]
            let m = Matrix4::new(
                c(ch * p, 0.0),  c(-ch * q, 0.0), c(0.0, -sh * p), c(0.0, sh * q),
                c(-ch * q, 0.0), c(ch * p, 0.0),  c(0.0, sh * q),  c(0.0, -sh * p),
                c(0.0, sh * p),  c(0.0, -sh * q), c(ch * p, 0.0),  c(-ch * q, 0.0),
                c(0.0, -sh * q), c(0.0, sh * p),  c(-ch * q, 0.0), c(ch * p, 0.0),
            );
            (TransferMatrix { m, z, family: Family::M3 }, NoiseFamily::Theta0)
        }
        PhaseCase::Pi => {
            let k = gm.hypot(g);
            let e = (-gm * z).exp();
            let (ch, sh) = (e * (k * z).cosh(), e * (k * z).sinh());
            let (r, q) = (gm / k * sh, g / k * sh);
            let o = c(0.0, 0.0);
            #[rustfmt::skip]
            let m = Matrix4::new(
                c(ch, 0.0), c(-r, 0.0), c(0.0, q),  o,
                c(-r, 0.0), c(ch, 0.0), o,          c(0.0, -q),
                c(0.0, -q), o,          c(ch, 0.0), c(-r, 0.0),
                o,          c(0.0, q),  c(-r, 0.0), c(ch, 0.0),
            );
            (TransferMatrix { m, z, family: Family::M4 }, NoiseFamily::ThetaPi)
        }
    };
    let kernels = NoiseKernels { family, g_eps: g, gamma: gm };
    Ok((tm, kernels.covariance(z)))
}
