//! Truncated multimode Fock space: basis enumeration, ladder operators and
//! the waveguide ↔ bright/dark change of basis.

mod bd;
mod basis;
mod sectors;
mod sparse;
mod state;

pub use basis::{build_basis, FockBasis};
pub use bd::{BdDirection, BdTransform, BrightDarkMap};
pub use sectors::{BlockOperator, SectorLayout};
pub use sparse::SparseOperator;
pub use state::{min_hermitian_eigenvalue, DensityMatrix, StateVector};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Waveguide {
    A,
    B,
    /// Lossy coupler guide of the three-mode model.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Frequency {
    Signal,
    Idler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeId {
    pub guide: Waveguide,
    pub freq: Frequency,
}

impl ModeId {
    pub const AS: ModeId = ModeId::new(Waveguide::A, Frequency::Signal);
    pub const AI: ModeId = ModeId::new(Waveguide::A, Frequency::Idler);
    pub const BS: ModeId = ModeId::new(Waveguide::B, Frequency::Signal);
    pub const BI: ModeId = ModeId::new(Waveguide::B, Frequency::Idler);
    pub const CS: ModeId = ModeId::new(Waveguide::C, Frequency::Signal);
    pub const CI: ModeId = ModeId::new(Waveguide::C, Frequency::Idler);

    pub const fn new(guide: Waveguide, freq: Frequency) -> Self {
        ModeId { guide, freq }
    }

    /// The four modes of the eliminated model, in canonical basis order.
    pub fn waveguide_modes() -> Vec<ModeId> {
        vec![Self::AS, Self::AI, Self::BS, Self::BI]
    }

    /// The six modes of the three-mode model.
    pub fn three_mode_modes() -> Vec<ModeId> {
        vec![Self::AS, Self::AI, Self::BS, Self::BI, Self::CS, Self::CI]
    }

    /// Same frequency in the other arm of the a/b pair; `None` for the coupler.
    pub fn partner(self) -> Option<ModeId> {
        match self.guide {
            Waveguide::A => Some(ModeId::new(Waveguide::B, self.freq)),
            Waveguide::B => Some(ModeId::new(Waveguide::A, self.freq)),
            Waveguide::C => None,
        }
    }

    pub fn label(self) -> &'static str {
        match (self.guide, self.freq) {
            (Waveguide::A, Frequency::Signal) => "a_s",
            (Waveguide::A, Frequency::Idler) => "a_i",
            (Waveguide::B, Frequency::Signal) => "b_s",
            (Waveguide::B, Frequency::Idler) => "b_i",
            (Waveguide::C, Frequency::Signal) => "c_s",
            (Waveguide::C, Frequency::Idler) => "c_i",
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModeId::three_mode_modes()
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::OperatorSpec(format!("unknown mode label `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Annihilate,
    Create,
    Number,
}

/// Matrix of a single-mode ladder operator on the truncated basis.
///
/// The creation operator is built as the exact conjugate transpose of the
/// annihilator, so states at the cap are mapped to zero.
pub fn ladder(basis: &FockBasis, mode: ModeId, kind: LadderKind) -> Result<SparseOperator> {
    let k = basis.mode_index(mode)?;
    let dim = basis.dim();
    let mut trip = Vec::new();
    match kind {
        LadderKind::Number => {
            for j in 0..dim {
                let n = basis.occupation(j)[k];
                if n > 0 {
                    trip.push((j, j, C64::new(n as f64, 0.0)));
                }
            }
        }
        LadderKind::Annihilate | LadderKind::Create => {
            let mut occ = vec![0u8; basis.modes().len()];
            for j in 0..dim {
                occ.copy_from_slice(basis.occupation(j));
                let n = occ[k];
                if n == 0 {
                    continue;
                }
                occ[k] -= 1;
                let i = basis
                    .index_of(&occ)
                    .expect("bases are closed under lowering an occupation");
                trip.push((i, j, C64::new((n as f64).sqrt(), 0.0)));
            }
        }
    }
    let a = SparseOperator::from_triplets(dim, trip)?;
    Ok(match kind {
        LadderKind::Create => a.adjoint(),
        _ => a,
    })
}

/// Product of ladder operators in the given order, e.g. `[(a_s, true), (a_s, false)]`
/// is a_s†a_s.
pub fn operator_product(basis: &FockBasis, ops: &[(ModeId, bool)]) -> Result<SparseOperator> {
    let mut acc = SparseOperator::identity(basis.dim());
    for &(mode, dagger) in ops {
        let kind = if dagger { LadderKind::Create } else { LadderKind::Annihilate };
        acc = &acc * &ladder(basis, mode, kind)?;
    }
    Ok(acc)
}
