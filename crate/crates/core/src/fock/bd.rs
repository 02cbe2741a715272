use std::sync::Arc;

use super::{DensityMatrix, FockBasis, Frequency, ModeId, SparseOperator, StateVector, Waveguide};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdDirection {
    /// Waveguide (a, b) representation to bright/dark (B, D).
    ToBd,
    ToWaveguide,
}

/// Unitary relabeling a → B, b → D with B = (a+b)/√2, D = (a−b)/√2.
///
/// In the bright/dark representation the a-slot of each basis state holds the
/// B occupation and the b-slot the D occupation. Coupler modes pass through.
#[derive(Debug, Clone)]
pub struct BrightDarkMap {
    basis: Arc<FockBasis>,
    u: SparseOperator,
    u_dag: SparseOperator,
}

impl BrightDarkMap {
    pub fn new(basis: Arc<FockBasis>) -> Result<Self> {
        let mut pairs = Vec::new();
        for freq in [Frequency::Signal, Frequency::Idler] {
            let a = ModeId::new(Waveguide::A, freq);
            let b = ModeId::new(Waveguide::B, freq);
            match (basis.mode_index(a), basis.mode_index(b)) {
                (Ok(ia), Ok(ib)) => pairs.push((ia, ib)),
                (Ok(_), Err(_)) => return Err(Error::BdTransform(format!("basis lacks {b}"))),
                (Err(_), Ok(_)) => return Err(Error::BdTransform(format!("basis lacks {a}"))),
                (Err(_), Err(_)) => {}
            }
        }
        if pairs.is_empty() {
            return Err(Error::BdTransform("basis holds no a/b mode pair".into()));
        }

        let dim = basis.dim();
        let mut trip = Vec::new();
        let mut occ = vec![0u8; basis.modes().len()];
        for col in 0..dim {
            let src = basis.occupation(col);
            // Expansion of every a/b pair, combined by a tensor product.
            let mut terms: Vec<(Vec<u8>, f64)> = vec![(src.to_vec(), 1.0)];
            for &(ia, ib) in &pairs {
                let split = pair_expansion(src[ia] as u32, src[ib] as u32);
                let mut next = Vec::with_capacity(terms.len() * split.len());
                for (o, w) in &terms {
                    for &(p, q, c) in &split {
                        let mut o2 = o.clone();
                        o2[ia] = p as u8;
                        o2[ib] = q as u8;
                        next.push((o2, w * c));
                    }
                }
                terms = next;
            }
            for (o, w) in terms {
                if w == 0.0 {
                    continue;
                }
                occ.copy_from_slice(&o);
                let row = basis.index_of(&occ).ok_or_else(|| {
                    Error::BdTransform(format!(
                        "truncation is not closed under the beamsplitter (state {o:?}); \
                         a/b caps must admit every split of n_a + n_b"
                    ))
                })?;
                trip.push((row, col, C64::new(w, 0.0)));
            }
        }
        let u = SparseOperator::from_triplets(dim, trip)?;
        let u_dag = u.adjoint();
        Ok(BrightDarkMap { basis, u, u_dag })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    /// Matrix taking waveguide-representation amplitudes to bright/dark ones.
    pub fn unitary(&self) -> &SparseOperator {
        &self.u
    }

    pub fn apply<T: BdTransform>(&self, x: &T, dir: BdDirection) -> Result<T> {
        x.bd_transform(self, dir)
    }

    fn forward(&self, dir: BdDirection) -> (&SparseOperator, &SparseOperator) {
        match dir {
            BdDirection::ToBd => (&self.u, &self.u_dag),
            BdDirection::ToWaveguide => (&self.u_dag, &self.u),
        }
    }
}

/// ⟨p, q | n_a, n_b⟩ where |p, q⟩ counts B and D photons.
fn pair_expansion(na: u32, nb: u32) -> Vec<(u32, u32, f64)> {
    let n = na + nb;
    let norm = 2f64.powf(-(n as f64) / 2.0) / (factorial(na) * factorial(nb)).sqrt();
    (0..=n)
        .map(|p| {
            let q = n - p;
            let mut s = 0.0;
            for j in 0..=na.min(p) {
                let k = p - j;
                if k > nb {
                    continue;
                }
                let sign = if (nb - k) % 2 == 0 { 1.0 } else { -1.0 };
                s += binomial(na, j) * binomial(nb, k) * sign;
            }
            (p, q, norm * s * (factorial(p) * factorial(q)).sqrt())
        })
        .collect()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

pub trait BdTransform: Sized {
    fn bd_transform(&self, map: &BrightDarkMap, dir: BdDirection) -> Result<Self>;
}

impl BdTransform for StateVector {
    fn bd_transform(&self, map: &BrightDarkMap, dir: BdDirection) -> Result<Self> {
        check_basis(map, self.basis())?;
        let (u, _) = map.forward(dir);
        StateVector::new(self.basis().clone(), u.matvec(self.amplitudes()))
    }
}

impl BdTransform for DensityMatrix {
    fn bd_transform(&self, map: &BrightDarkMap, dir: BdDirection) -> Result<Self> {
        check_basis(map, self.basis())?;
        let (u, _) = map.forward(dir);
        let left = u.mul_dense(self.matrix());
        // (U ρ) U† = (U (U ρ)†)†
        let out = u.mul_dense(&left.adjoint()).adjoint();
        DensityMatrix::new(self.basis().clone(), out)
    }
}

impl BdTransform for SparseOperator {
    fn bd_transform(&self, map: &BrightDarkMap, dir: BdDirection) -> Result<Self> {
        if self.dim() != map.basis.dim() {
            return Err(Error::DimensionMismatch { expected: map.basis.dim(), found: self.dim() });
        }
        let (u, u_dag) = map.forward(dir);
        Ok(&(u * self) * u_dag)
    }
}

fn check_basis(map: &BrightDarkMap, basis: &Arc<FockBasis>) -> Result<()> {
    if Arc::ptr_eq(&map.basis, basis) || *map.basis == **basis {
        Ok(())
    } else {
        Err(Error::BdTransform("state and transform use different bases".into()))
    }
}
