//! Exhaustive enumeration of all `K^n` outcomes of a small discrete sample.

use crate::discrete::{mi_bernoulli, mi_discrete_exact, mi_from_table, DiscreteDist};
use crate::error::{domain, Error, Result};

use super::{OracleKind, OracleReport};

pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

fn check(n: u64, k: usize, r: u64, m: u64, budget: u64) -> Result<u64> {
    if !(1 <= r && r < m && m <= n) {
        return Err(domain(format!(
            "need 1 ≤ r < m ≤ n, got n = {n}, r = {r}, m = {m}"
        )));
    }
    let outcomes = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if n > u32::MAX as u64 || outcomes > budget as u128 {
        return Err(Error::EnumerationBudget { outcomes, budget });
    }
    Ok(outcomes as u64)
}

/// Joint pmf of `(X_(r), X_(m))` over support indices, by visiting every
/// outcome with its product probability.
pub fn enum_joint_pmf(
    n: u64,
    dist: &DiscreteDist,
    r: u64,
    m: u64,
    budget: u64,
) -> Result<(Vec<Vec<f64>>, u64)> {
    let k = dist.len();
    let outcomes = check(n, k, r, m, budget)?;
    let probs = dist.probs();
    let n = n as usize;
    let mut table = vec![vec![0.0; k]; k];
    let mut digits = vec![0usize; n];
    let mut counts = vec![0usize; k];
    for _ in 0..outcomes {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut w = 1.0;
        for &d in &digits {
            counts[d] += 1;
            w *= probs[d];
        }
        // r-th smallest value is the first support index whose cumulative
        // count reaches r
        let (mut cum, mut a, mut b) = (0usize, usize::MAX, usize::MAX);
        for (i, &c) in counts.iter().enumerate() {
            cum += c;
            if a == usize::MAX && cum >= r as usize {
                a = i;
            }
            if cum >= m as usize {
                b = i;
                break;
            }
        }
        table[a][b] += w;
        // odometer increment
        for d in digits.iter_mut() {
            *d += 1;
            if *d < k {
                break;
            }
            *d = 0;
        }
    }
    Ok((table, outcomes))
}

/// Enumeration MI against [`mi_discrete_exact`].
pub fn enum_mi_discrete(
    n: u64,
    dist: &DiscreteDist,
    r: u64,
    m: u64,
    budget: u64,
) -> Result<OracleReport> {
    let (table, outcomes) = enum_joint_pmf(n, dist, r, m, budget)?;
    let closed = mi_discrete_exact(n, dist, r, m)?;
    Ok(OracleReport::new(
        closed,
        mi_from_table(&table),
        OracleKind::Enumeration,
        outcomes,
    ))
}

/// Enumeration MI for a Bernoulli(p) sample against [`mi_bernoulli`].
pub fn enum_mi_bernoulli(n: u64, p: f64, r: u64, m: u64, budget: u64) -> Result<OracleReport> {
    let dist = DiscreteDist::bernoulli(p)?;
    let (table, outcomes) = enum_joint_pmf(n, &dist, r, m, budget)?;
    let closed = mi_bernoulli(n, p, r, m)?;
    Ok(OracleReport::new(
        closed,
        mi_from_table(&table),
        OracleKind::Enumeration,
        outcomes,
    ))
}
