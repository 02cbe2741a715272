use std::collections::HashMap;

use super::{cov_index, CovarianceState};
use crate::fock::ModeId;
use crate::observables::check_normal_order;
use crate::{Error, Result, C64};

const MAX_FACTORS: usize = 16;

/// ⟨Π v† Π v⟩ of a zero-mean Gaussian state as a hafnian over pair contractions.
///
/// Contractions are conj(M) for two creators, N for a creator followed by an
/// annihilator, and M for two annihilators.
pub fn wick_moment(cov: &CovarianceState, ops: &[(ModeId, bool)]) -> Result<C64> {
    if ops.len() % 2 == 1 {
        return Err(Error::OperatorSpec(format!("odd number of factors ({})", ops.len())));
    }
    if ops.len() > MAX_FACTORS {
        return Err(Error::OperatorSpec(format!("at most {MAX_FACTORS} factors are supported")));
    }
    check_normal_order(ops)?;
    let idx = ops.iter().map(|&(m, _)| cov_index(m)).collect::<Result<Vec<_>>>()?;
    let n = ops.len();
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i + 1..n {
            a[i * n + j] = match (ops[i].1, ops[j].1) {
                (true, true) => cov.m_block[(idx[i], idx[j])].conj(),
                (true, false) => cov.n_block[(idx[i], idx[j])],
                (false, false) => cov.m_block[(idx[i], idx[j])],
                (false, true) => unreachable!("normal order checked above"),
            };
        }
    }
    let mut memo = HashMap::new();
    Ok(hafnian(&a, n, (1u32 << n) - 1, &mut memo))
}

/// Sum over perfect matchings of the set bits of `mask`; the lowest index is
/// paired with each remaining one in increasing order.
fn hafnian(a: &[C64], n: usize, mask: u32, memo: &mut HashMap<u32, C64>) -> C64 {
    if mask == 0 {
        return C64::new(1.0, 0.0);
    }
    if let Some(&v) = memo.get(&mask) {
        return v;
    }
    let i = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << i);
    let mut acc = C64::new(0.0, 0.0);
    let mut m = rest;
    while m != 0 {
        let j = m.trailing_zeros() as usize;
        m &= m - 1;
        acc += a[i * n + j] * hafnian(a, n, rest & !(1 << j), memo);
    }
    memo.insert(mask, acc);
    acc
}

/// G⁽⁴⁾ = ⟨a_s†a_i†b_s†b_i† b_i b_s a_i a_s⟩.
pub fn g4_from_covariance(cov: &CovarianceState) -> Result<f64> {
    let spec = [
        (ModeId::AS, true),
        (ModeId::AI, true),
        (ModeId::BS, true),
        (ModeId::BI, true),
        (ModeId::BI, false),
        (ModeId::BS, false),
        (ModeId::AI, false),
        (ModeId::AS, false),
    ];
    Ok(wick_moment(cov, &spec)?.re)
}
