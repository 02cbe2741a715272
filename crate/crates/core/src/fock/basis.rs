use std::collections::HashMap;

use super::ModeId;
use crate::{Error, Result};

/// Occupation-number basis with per-mode and optional total-photon caps.
///
/// States are ordered lexicographically with the first declared mode most
/// significant, so index 0 is always the vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    modes: Vec<ModeId>,
    caps: Vec<u8>,
    total_cap: Option<usize>,
    occ: Vec<u8>,
    index: HashMap<u64, usize>,
}

pub fn build_basis(modes: &[ModeId], per_mode_cap: usize, total_cap: Option<usize>) -> Result<FockBasis> {
    FockBasis::new(modes, per_mode_cap, total_cap)
}

impl FockBasis {
    pub fn new(modes: &[ModeId], per_mode_cap: usize, total_cap: Option<usize>) -> Result<Self> {
        Self::with_mode_caps(modes, &vec![per_mode_cap; modes.len()], total_cap)
    }

    pub fn with_mode_caps(modes: &[ModeId], caps: &[usize], total_cap: Option<usize>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Basis("empty mode list".into()));
        }
        if caps.len() != modes.len() {
            return Err(Error::DimensionMismatch { expected: modes.len(), found: caps.len() });
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::Basis(format!("mode {m} listed twice")));
            }
        }
        if let Some(&c) = caps.iter().find(|&&c| c > 254) {
            return Err(Error::Basis(format!("per-mode cap {c} exceeds 254")));
        }
        // Effective per-mode caps never exceed the total cap.
        let caps: Vec<u8> = caps
            .iter()
            .map(|&c| total_cap.map_or(c, |t| c.min(t)) as u8)
            .collect();
        // Radix for the lookup key; the key must fit in 64 bits.
        let radix: u64 = caps.iter().map(|&c| c as u64 + 1).max().unwrap_or(1);
        let bits = (radix as f64).log2() * modes.len() as f64;
        if bits >= 63.0 {
            return Err(Error::Basis("basis too large to index".into()));
        }

        let k = modes.len();
        let mut occ = Vec::new();
        let mut cur = vec![0u8; k];
        enumerate(&caps, total_cap.unwrap_or(usize::MAX), 0, 0, &mut cur, &mut occ);

        let mut basis = FockBasis {
            modes: modes.to_vec(),
            caps,
            total_cap,
            occ,
            index: HashMap::new(),
        };
        let dim = basis.dim();
        basis.index.reserve(dim);
        for i in 0..dim {
            let key = basis.key(basis.occupation(i));
            basis.index.insert(key, i);
        }
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.occ.len() / self.modes.len()
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn mode_caps(&self) -> &[u8] {
        &self.caps
    }

    pub fn total_cap(&self) -> Option<usize> {
        self.total_cap
    }

    pub fn contains(&self, mode: ModeId) -> bool {
        self.modes.contains(&mode)
    }

    pub fn mode_index(&self, mode: ModeId) -> Result<usize> {
        self.modes
            .iter()
            .position(|&m| m == mode)
            .ok_or(Error::UnknownMode(mode))
    }

    pub fn occupation(&self, i: usize) -> &[u8] {
        let k = self.modes.len();
        &self.occ[i * k..(i + 1) * k]
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        if occ.len() != self.modes.len() || occ.iter().zip(&self.caps).any(|(n, c)| n > c) {
            return None;
        }
        self.index.get(&self.key(occ)).copied()
    }

    /// Index of the state with the listed occupations (all other modes empty).
    pub fn index_of_modes(&self, occupied: &[(ModeId, u8)]) -> Result<usize> {
        let mut occ = vec![0u8; self.modes.len()];
        for &(m, n) in occupied {
            occ[self.mode_index(m)?] += n;
        }
        self.index_of(&occ)
            .ok_or_else(|| Error::Basis(format!("occupation {occ:?} lies outside the truncation")))
    }

    pub fn total_photons(&self, i: usize) -> usize {
        self.occupation(i).iter().map(|&n| n as usize).sum()
    }

    fn key(&self, occ: &[u8]) -> u64 {
        let radix = self.caps.iter().map(|&c| c as u64 + 1).max().unwrap_or(1);
        occ.iter().fold(0u64, |acc, &n| acc * radix + n as u64)
    }
}

fn enumerate(caps: &[u8], budget: usize, pos: usize, used: usize, cur: &mut [u8], out: &mut Vec<u8>) {
    if pos == caps.len() {
        out.extend_from_slice(cur);
        return;
    }
    let top = (caps[pos] as usize).min(budget - used);
    for n in 0..=top {
        cur[pos] = n as u8;
        enumerate(caps, budget, pos + 1, used + n, cur, out);
    }
    cur[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_first_and_lexicographic() {
        let b = FockBasis::new(&ModeId::waveguide_modes(), 1, None).unwrap();
        assert_eq!(b.occupation(0), &[0, 0, 0, 0]);
        assert_eq!(b.occupation(1), &[0, 0, 0, 1]);
        assert_eq!(b.occupation(15), &[1, 1, 1, 1]);
    }

    #[test]
    fn rejects_duplicates() {
        assert!(FockBasis::new(&[ModeId::AS, ModeId::AS], 2, None).is_err());
    }
}
