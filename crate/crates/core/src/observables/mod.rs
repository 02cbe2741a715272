//! Correlation observables for every state representation, and sweep-curve
//! post-processing.

mod sweep;

pub use sweep::{endpoint_record, sweep_phase, sweep_phase_points, theta_grid, Engine, SweepOptions};

use serde::{Deserialize, Serialize};

use crate::fock::{operator_product, DensityMatrix, FockBasis, ModeId, SparseOperator, StateVector};
use crate::{Error, Result, C64};

/// Ordered list of (mode, dagger) factors.
pub type OpSpec = [(ModeId, bool)];

pub const MODES: [ModeId; 4] = [ModeId::AS, ModeId::AI, ModeId::BS, ModeId::BI];

/// Intra-pair (a), intra-pair (b), then the two inter-waveguide pairs.
pub const G2_PAIRS: [(ModeId, ModeId); 4] = [
    (ModeId::AS, ModeId::AI),
    (ModeId::BS, ModeId::BI),
    (ModeId::AS, ModeId::BI),
    (ModeId::AI, ModeId::BS),
];

/// A photon pair and a third photon from the other waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub pair: (ModeId, ModeId),
    pub single: ModeId,
}

pub const G3_TRIPLES: [Triple; 4] = [
    Triple { pair: (ModeId::AS, ModeId::AI), single: ModeId::BS },
    Triple { pair: (ModeId::AS, ModeId::AI), single: ModeId::BI },
    Triple { pair: (ModeId::BS, ModeId::BI), single: ModeId::AS },
    Triple { pair: (ModeId::BS, ModeId::BI), single: ModeId::AI },
];

/// Column labels matching the field layout of [`CorrelationRecord`].
pub fn g2_label(k: usize) -> String {
    let (x, y) = G2_PAIRS[k];
    format!("G2_{}_{}", x.label().replace('_', ""), y.label().replace('_', ""))
}

pub fn g3_label(k: usize) -> String {
    let t = G3_TRIPLES[k];
    format!(
        "G3_{}_{}_{}",
        t.pair.0.label().replace('_', ""),
        t.pair.1.label().replace('_', ""),
        t.single.label().replace('_', "")
    )
}

pub fn r3_label(k: usize) -> String {
    g3_label(k).replacen("G3", "R3", 1)
}

/// Unnormalized correlators at one (z, θ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub z: f64,
    pub theta: f64,
    /// ⟨n⟩ for a_s, a_i, b_s, b_i.
    pub n: [f64; 4],
    /// G⁽²⁾ over [`G2_PAIRS`].
    pub g2: [f64; 4],
    /// G⁽³⁾ over [`G3_TRIPLES`].
    pub g3: [f64; 4],
    pub g4: f64,
    /// ⟨B†B⟩ for signal, idler.
    pub n_bright: [f64; 2],
    /// ⟨D†D⟩ for signal, idler.
    pub n_dark: [f64; 2],
    /// Tr ρ, or ⟨ψ|ψ⟩ for unnormalized pure states.
    pub norm: f64,
}

impl CorrelationRecord {
    pub fn mean_photons(&self, mode: ModeId) -> Option<f64> {
        MODES.iter().position(|&m| m == mode).map(|k| self.n[k])
    }

    /// G⁽⁴⁾ / (n_as n_ai n_bs n_bi)
    pub fn g4_normalized(&self) -> Result<f64> {
        g4(self)
    }

    pub fn r4(&self) -> Result<f64> {
        r4(self)
    }

    pub fn r3(&self, triple: usize) -> Result<f64> {
        r3(self, &G3_TRIPLES[triple])
    }

    /// G⁽²⁾ / (n_x n_y) for pair `k` of [`G2_PAIRS`].
    pub fn g2_normalized(&self, k: usize) -> Result<f64> {
        let (x, y) = G2_PAIRS[k];
        let d = self.mean_photons(x).unwrap() * self.mean_photons(y).unwrap();
        ratio(self.g2[k], d, "g2")
    }

    /// Relative difference of bright and dark populations, per frequency.
    pub fn bright_dark_asymmetry(&self) -> [f64; 2] {
        let f = |b: f64, d: f64| if b + d > 0.0 { (b - d).abs() / (b + d) } else { 0.0 };
        [f(self.n_bright[0], self.n_dark[0]), f(self.n_bright[1], self.n_dark[1])]
    }
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if den > 0.0 && den.is_finite() {
        Ok(num / den)
    } else {
        Err(Error::UndefinedObservable(format!("{what}: denominator is {den:e}")))
    }
}

pub fn g4(r: &CorrelationRecord) -> Result<f64> {
    if let Some(k) = r.n.iter().position(|&n| !(n > 0.0)) {
        return Err(Error::UndefinedObservable(format!(
            "g4 needs all mean photon numbers > 0, but <n_{}> = {:e}",
            MODES[k].label(),
            r.n[k]
        )));
    }
    Ok(r.g4 / r.n.iter().product::<f64>())
}

/// G⁽⁴⁾ / (G⁽²⁾_{a_s,a_i} G⁽²⁾_{b_s,b_i})
pub fn r4(r: &CorrelationRecord) -> Result<f64> {
    if !(r.g2[0] > 0.0 && r.g2[1] > 0.0) {
        return Err(Error::UndefinedObservable(format!(
            "R4 needs both intra-pair G2 > 0, got {:e} and {:e}",
            r.g2[0], r.g2[1]
        )));
    }
    Ok(r.g4 / (r.g2[0] * r.g2[1]))
}

/// G⁽³⁾(μ,ν;λ) / (G⁽²⁾(μ,ν) ⟨n_λ⟩)
pub fn r3(r: &CorrelationRecord, t: &Triple) -> Result<f64> {
    let k3 = G3_TRIPLES
        .iter()
        .position(|x| x == t)
        .ok_or_else(|| Error::UndefinedObservable("unsupported R3 triple".into()))?;
    let k2 = G2_PAIRS.iter().position(|&p| p == t.pair).unwrap();
    let n = r.mean_photons(t.single).unwrap();
    ratio(r.g3[k3], r.g2[k2] * n, "R3")
}

/// (max − min)/(max + min) of a sampled curve.
pub fn visibility(curve: &[f64]) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::UndefinedObservable("visibility of an empty curve".into()));
    }
    let max = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = curve.iter().copied().fold(f64::INFINITY, f64::min);
    ratio(max - min, max + min, "visibility")
}

/// Index of the smallest element (first one on ties).
pub fn argmin(curve: &[f64]) -> Option<usize> {
    (0..curve.len()).min_by(|&a, &b| curve[a].total_cmp(&curve[b]))
}

pub fn argmax(curve: &[f64]) -> Option<usize> {
    (0..curve.len()).max_by(|&a, &b| curve[a].total_cmp(&curve[b]).then(b.cmp(&a)))
}

pub(crate) fn check_normal_order(ops: &OpSpec) -> Result<()> {
    if let Some(k) = ops.windows(2).position(|w| !w[0].1 && w[1].1) {
        return Err(Error::OperatorSpec(format!(
            "not normal ordered: {}† follows annihilator {}",
            ops[k + 1].0, ops[k].0
        )));
    }
    Ok(())
}

/// Anything that can evaluate ⟨Π a† Π a⟩.
pub trait MomentSource {
    fn normally_ordered_moment(&self, ops: &OpSpec) -> Result<C64>;
}

pub fn normally_ordered_moment<S: MomentSource + ?Sized>(state: &S, ops: &OpSpec) -> Result<C64> {
    state.normally_ordered_moment(ops)
}

impl MomentSource for DensityMatrix {
    fn normally_ordered_moment(&self, ops: &OpSpec) -> Result<C64> {
        check_normal_order(ops)?;
        self.expectation(&operator_product(self.basis(), ops)?)
    }
}

impl MomentSource for StateVector {
    fn normally_ordered_moment(&self, ops: &OpSpec) -> Result<C64> {
        check_normal_order(ops)?;
        self.expectation(&operator_product(self.basis(), ops)?)
    }
}

/// Operator specs behind every field of [`CorrelationRecord`], in a fixed order.
pub fn standard_specs() -> Vec<Vec<(ModeId, bool)>> {
    let mut s = Vec::new();
    for m in MODES {
        s.push(vec![(m, true), (m, false)]);
    }
    for (x, y) in G2_PAIRS {
        s.push(vec![(x, true), (y, true), (y, false), (x, false)]);
    }
    for t in G3_TRIPLES {
        let (x, y, w) = (t.pair.0, t.pair.1, t.single);
        s.push(vec![(x, true), (y, true), (w, true), (w, false), (y, false), (x, false)]);
    }
    s.push(vec![
        (ModeId::AS, true),
        (ModeId::AI, true),
        (ModeId::BS, true),
        (ModeId::BI, true),
        (ModeId::BI, false),
        (ModeId::BS, false),
        (ModeId::AI, false),
        (ModeId::AS, false),
    ]);
    // ⟨a_μ† b_μ⟩ for the bright/dark populations.
    s.push(vec![(ModeId::AS, true), (ModeId::BS, false)]);
    s.push(vec![(ModeId::AI, true), (ModeId::BI, false)]);
    s.push(vec![]);
    s
}

pub fn record_from_values(z: f64, theta: f64, v: &[C64]) -> CorrelationRecord {
    let re = |k: usize| v[k].re;
    let n = [re(0), re(1), re(2), re(3)];
    let cross = [v[13].re, v[14].re];
    let bright = |k: usize, na: f64, nb: f64| 0.5 * (na + nb) + cross[k];
    let dark = |k: usize, na: f64, nb: f64| 0.5 * (na + nb) - cross[k];
    CorrelationRecord {
        z,
        theta,
        n,
        g2: [re(4), re(5), re(6), re(7)],
        g3: [re(8), re(9), re(10), re(11)],
        g4: re(12),
        n_bright: [bright(0, n[0], n[2]), bright(1, n[1], n[3])],
        n_dark: [dark(0, n[0], n[2]), dark(1, n[1], n[3])],
        norm: re(15),
    }
}

/// Correlation record from any moment source.
pub fn correlation_record<S: MomentSource + ?Sized>(state: &S, z: f64, theta: f64) -> Result<CorrelationRecord> {
    let vals = standard_specs()
        .iter()
        .map(|s| state.normally_ordered_moment(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(record_from_values(z, theta, &vals))
}

/// Precomputed operator matrices for the standard record on one basis.
#[derive(Debug, Clone)]
pub struct FockObservables {
    ops: Vec<SparseOperator>,
}

impl FockObservables {
    pub fn new(basis: &FockBasis) -> Result<Self> {
        let ops = standard_specs()
            .iter()
            .map(|s| operator_product(basis, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(FockObservables { ops })
    }

    pub fn operators(&self) -> &[SparseOperator] {
        &self.ops
    }

    pub fn record(&self, z: f64, theta: f64, expect: impl Fn(&SparseOperator) -> C64) -> CorrelationRecord {
        let vals: Vec<C64> = self.ops.iter().map(expect).collect();
        record_from_values(z, theta, &vals)
    }
}
