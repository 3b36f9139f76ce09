//! Distribution-free quantities for continuous order statistics.
//!
//! For any sampling distribution with an invertible cdf the quantile
//! transform maps the sample onto i.i.d. uniforms while preserving order,
//! and KL divergence / mutual information are invariant under that
//! bijection. Everything here is therefore computed for uniform order
//! statistics `U_(1) < … < U_(n)` and holds verbatim for any such `X`.
//!
//! All KL / MI values are in nats.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special::{digamma, DoubleDouble, TSeqContext};

/// A nonempty, strictly increasing subset of `{1, …, n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSet {
    n: u64,
    indices: Vec<u64>,
}

impl IndexSet {
    pub fn new(n: u64, indices: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(domain("sample size n must be ≥ 1"));
        }
        if indices.is_empty() {
            return Err(domain("index set must be nonempty"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
            return Err(domain(format!("index {bad} is outside [1, {n}]")));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(domain(format!(
                "indices must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self { n, indices })
    }

    /// Sorts the input first; duplicates are still rejected.
    pub fn from_unsorted(n: u64, mut indices: Vec<u64>) -> Result<Self> {
        indices.sort_unstable();
        Self::new(n, indices)
    }

    pub fn singleton(n: u64, i: u64) -> Result<Self> {
        Self::new(n, vec![i])
    }

    pub fn full(n: u64) -> Result<Self> {
        Self::new(n, (1..=n).collect())
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `i_0 = 0, i_1, …, i_k, i_{k+1} = n + 1`.
    pub fn augmented(&self) -> impl Iterator<Item = u64> + '_ {
        std::iter::once(0)
            .chain(self.indices.iter().copied())
            .chain(std::iter::once(self.n + 1))
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        let (mut a, mut b) = (
            self.indices.iter().peekable(),
            other.indices.iter().peekable(),
        );
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &IndexSet) -> Result<IndexSet> {
        if self.n != other.n {
            return Err(domain(format!(
                "index sets refer to different sample sizes ({} vs {})",
                self.n, other.n
            )));
        }
        let mut all: Vec<u64> = self.indices.iter().chain(&other.indices).copied().collect();
        all.sort_unstable();
        all.dedup();
        IndexSet::new(self.n, all)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(u64::to_string).collect();
        write!(f, "{{{}}} ⊆ [{}]", parts.join(","), self.n)
    }
}

/// Mutual information is `+∞` when the two index sets share an order statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiValue {
    Finite(f64),
    Infinite,
}

impl MiValue {
    pub fn to_f64(self) -> f64 {
        match self {
            MiValue::Finite(v) => v,
            MiValue::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            MiValue::Finite(v) => Some(v),
            MiValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, MiValue::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Limit,
    OracleQuadrature,
    OracleEnumeration,
    OracleMontecarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::ClosedForm => "closed-form",
            Method::Limit => "limit",
            Method::OracleQuadrature => "oracle-quadrature",
            Method::OracleEnumeration => "oracle-enumeration",
            Method::OracleMontecarlo => "oracle-montecarlo",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiResult {
    pub value: MiValue,
    pub method: Method,
    pub diagnostics: Option<String>,
}

impl MiResult {
    fn closed_form(value: f64) -> Self {
        Self {
            value: MiValue::Finite(value),
            method: Method::ClosedForm,
            diagnostics: None,
        }
    }

    fn overlap(detail: String) -> Self {
        Self {
            value: MiValue::Infinite,
            method: Method::ClosedForm,
            diagnostics: Some(detail),
        }
    }
}

fn kl_subset_dd(ctx: &TSeqContext, idx: &IndexSet) -> DoubleDouble {
    let n = idx.n;
    let ix = &idx.indices;
    let mut acc = DoubleDouble::ZERO;
    // Σ_{t=2..k} (T_{i_t − 1} − T_{i_t − i_{t−1} − 1})
    for w in ix.windows(2) {
        acc += ctx.t_diff_dd(w[1] - w[0] - 1, w[1] - 1);
    }
    // Σ_{t=1..k−1} (T_{n − i_t} − T_n)
    for &i in &ix[..ix.len() - 1] {
        acc += ctx.t_diff_dd(n, n - i);
    }
    acc
}

/// `D_KL(P_{U_(I)} ‖ ∏_{i∈I} P_{U_(i)})` for a subset `I` of order statistics.
pub fn kl_subset(idx: &IndexSet) -> f64 {
    kl_subset_dd(TSeqContext::global(), idx).to_f64().max(0.0)
}

/// KL divergence between the joint law of the whole sorted sample and the
/// product of its marginals: `2 Σ_{t=1}^{n−1} T_t − (n−1) T_n`.
pub fn kl_whole_sequence(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("kl_whole_sequence requires n ≥ 1"));
    }
    let ctx = TSeqContext::global();
    let mut acc = DoubleDouble::ZERO;
    for t in 1..n {
        acc += ctx.t_value_dd(t) * 2.0;
    }
    acc -= ctx.t_value_dd(n) * (n - 1) as f64;
    Ok(acc.to_f64().max(0.0))
}

/// KL divergence for the pair (minimum, maximum): `log((n−1)/n) + 1/(n−1)`.
pub fn kl_min_max(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("kl_min_max requires n ≥ 2, got {n}")));
    }
    let nf = n as f64;
    Ok((-1.0 / nf).ln_1p() + 1.0 / (nf - 1.0))
}

fn check_index(n: u64, name: &str, i: u64) -> Result<()> {
    if i == 0 || i > n {
        return Err(domain(format!(
            "{name} = {i} must lie in [1, n] = [1, {n}]"
        )));
    }
    Ok(())
}

fn mi_pair_dd(ctx: &TSeqContext, n: u64, r: u64, m: u64) -> DoubleDouble {
    ctx.t_diff_dd(m - r - 1, m - 1) + ctx.t_diff_dd(n, n - r)
}

/// `I(X_(r); X_(m)) = T_{m−1} + T_{n−r} − T_{m−r−1} − T_n` for `r < m`;
/// arguments in either order, `+∞` when `r = m`.
pub fn mi_pair(n: u64, r: u64, m: u64) -> Result<MiResult> {
    if n == 0 {
        return Err(domain("sample size n must be ≥ 1"));
    }
    check_index(n, "r", r)?;
    check_index(n, "m", m)?;
    if r == m {
        return Ok(MiResult::overlap(format!(
            "r = m = {r}: an order statistic shares infinite information with itself"
        )));
    }
    let (r, m) = if r < m { (r, m) } else { (m, r) };
    let v = mi_pair_dd(TSeqContext::global(), n, r, m);
    Ok(MiResult::closed_form(v.to_f64().max(0.0)))
}

/// `I(X_(A); X_(B))` for disjoint index sets, via
/// `D(P_{A∪B}‖∏) − D(P_A‖∏) − D(P_B‖∏)`.
pub fn mi_subsets(n: u64, a: &IndexSet, b: &IndexSet) -> Result<MiResult> {
    for (name, s) in [("a", a), ("b", b)] {
        if s.n() != n {
            return Err(domain(format!(
                "index set {name} was built for n = {}, expected n = {n}",
                s.n()
            )));
        }
    }
    if !a.is_disjoint(b) {
        return Ok(MiResult::overlap(format!("index sets {a} and {b} overlap")));
    }
    let ctx = TSeqContext::global();
    let joint = a.union(b)?;
    let v = kl_subset_dd(ctx, &joint) - kl_subset_dd(ctx, a) - kl_subset_dd(ctx, b);
    Ok(MiResult::closed_form(v.to_f64().max(0.0)))
}

/// Joint density of `(U_(i_1), …, U_(i_k))` at `point`.
///
/// Support is `0 < x_1 < … < x_k < 1`; the boundary values are
/// `x_(i_0) = 0` and `x_(i_{k+1}) = 1`.
pub fn joint_pdf_uniform(idx: &IndexSet, point: &[f64]) -> Result<f64> {
    if point.len() != idx.len() {
        return Err(domain(format!(
            "point has dimension {} but the index set has {} members",
            point.len(),
            idx.len()
        )));
    }
    let inside = point.iter().all(|&x| x > 0.0 && x < 1.0) && point.windows(2).all(|w| w[0] < w[1]);
    if !inside {
        return Ok(0.0);
    }
    let ctx = TSeqContext::global();
    let aug: Vec<u64> = idx.augmented().collect();
    let mut log_density = ctx.log_factorial(idx.n());
    let mut prev_x = 0.0;
    for (t, w) in aug.windows(2).enumerate() {
        let exponent = w[1] - w[0] - 1;
        let x = if t < point.len() { point[t] } else { 1.0 };
        log_density -= ctx.log_factorial(exponent);
        if exponent > 0 {
            log_density += exponent as f64 * (x - prev_x).ln();
        }
        prev_x = x;
    }
    Ok(log_density.exp())
}

/// Which log-moment of a uniform order statistic to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogMoment {
    /// `E[log U_(m)]`
    LogU,
    /// `E[log(1 − U_(m))]`
    LogOneMinusU,
    /// `E[log(U_(m) − U_(r))]`
    LogGap { r: u64 },
}

/// Log-expectations of uniform order statistics, from
/// `U_(m) ~ Beta(m, n+1−m)` and `U_(m) − U_(r) ~ Beta(m−r, n+1−m+r)`.
pub fn beta_log_expectation(n: u64, m: u64, kind: LogMoment) -> Result<f64> {
    if n == 0 {
        return Err(domain("sample size n must be ≥ 1"));
    }
    check_index(n, "m", m)?;
    let psi_top = digamma((n + 1) as f64)?;
    let v = match kind {
        LogMoment::LogU => digamma(m as f64)? - psi_top,
        LogMoment::LogOneMinusU => digamma((n + 1 - m) as f64)? - psi_top,
        LogMoment::LogGap { r } => {
            if r == 0 || r >= m {
                return Err(domain(format!(
                    "log-gap requires 1 ≤ r < m, got r = {r}, m = {m}"
                )));
            }
            digamma((m - r) as f64)? - psi_top
        }
    };
    Ok(v)
}

/// `Cov(U_(r), U_(m)) = r(n−m+1) / ((n+1)²(n+2))` for `r ≤ m`.
pub fn covariance_uniform(n: u64, r: u64, m: u64) -> Result<f64> {
    if n == 0 || r == 0 || r > m || m > n {
        return Err(domain(format!(
            "covariance_uniform requires 1 ≤ r ≤ m ≤ n, got n = {n}, r = {r}, m = {m}"
        )));
    }
    let nf = n as f64;
    Ok(r as f64 * (nf - m as f64 + 1.0) / ((nf + 1.0) * (nf + 1.0) * (nf + 2.0)))
}

/// `Cov(X_(1), X_(2)) = 1/(λ² n²)` for an exponential sample with rate `λ`.
/// Unlike the mutual information, this depends on the sampling law.
pub fn covariance_exponential_min2(n: u64, lambda: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!(
            "covariance_exponential_min2 requires n ≥ 2, got {n}"
        )));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(format!(
            "rate λ must be finite and > 0, got {lambda}"
        )));
    }
    let nf = n as f64;
    Ok(1.0 / (lambda * lambda * nf * nf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(n: u64, r: u64, m: u64) -> f64 {
        mi_pair(n, r, m).unwrap().value.to_f64()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    #[test]
    fn index_set_validation() {
        assert!(IndexSet::new(3, vec![]).is_err());
        assert!(IndexSet::new(3, vec![0, 1]).is_err());
        assert!(IndexSet::new(3, vec![1, 4]).is_err());
        assert!(IndexSet::new(3, vec![2, 2]).is_err());
        assert!(IndexSet::new(3, vec![3, 1]).is_err());
        assert!(IndexSet::new(0, vec![1]).is_err());
        let s = IndexSet::from_unsorted(5, vec![4, 2]).unwrap();
        assert_eq!(s.indices(), &[2, 4]);
        assert_eq!(s.augmented().collect::<Vec<_>>(), vec![0, 2, 4, 6]);
    }

    #[test]
    fn kl_subset_examples() {
        let v = kl_subset(&IndexSet::new(2, vec![1, 2]).unwrap());
        assert!(rel_close(v, 0.306852819440055, 1e-12));
        assert_eq!(kl_subset(&IndexSet::singleton(9, 4).unwrap()), 0.0);
        let v = kl_subset(&IndexSet::full(3).unwrap());
        assert!((v - (3.0 - 2.0 * 3f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn kl_whole_sequence_examples() {
        assert_eq!(kl_whole_sequence(1).unwrap(), 0.0);
        assert!((kl_whole_sequence(2).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!((kl_whole_sequence(3).unwrap() - (3.0 - 2.0 * 3f64.ln())).abs() < 1e-14);
        assert!(kl_whole_sequence(0).is_err());
    }

    #[test]
    fn kl_min_max_examples() {
        assert!((kl_min_max(2).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!((kl_min_max(10).unwrap() - ((0.9f64).ln() + 1.0 / 9.0)).abs() < 1e-15);
        let n = 10_000u64;
        let scaled = (n * n) as f64 * kl_min_max(n).unwrap();
        assert!((scaled - 0.5).abs() < 1e-3);
        assert!(kl_min_max(1).is_err());
    }

    #[test]
    fn mi_pair_examples() {
        assert!(rel_close(mi(2, 1, 2), 0.306852819440055, 1e-12));
        assert!(rel_close(mi(50, 49, 50), 0.567182332901297, 1e-9));
        assert!(rel_close(100.0 * mi(100, 50, 100), 0.502499875031504, 1e-9));
    }

    #[test]
    fn mi_pair_overlap_and_domain() {
        let r = mi_pair(5, 3, 3).unwrap();
        assert!(r.value.is_infinite());
        assert!(r.diagnostics.is_some());
        assert!(mi_pair(5, 0, 3).is_err());
        assert!(mi_pair(5, 2, 6).is_err());
        assert_eq!(mi(7, 2, 5), mi(7, 5, 2));
    }

    #[test]
    fn mi_subsets_singletons_match_pair() {
        for (n, r, m) in [(5u64, 1u64, 4u64), (10, 3, 7), (40, 20, 21)] {
            let a = IndexSet::singleton(n, r).unwrap();
            let b = IndexSet::singleton(n, m).unwrap();
            let v = mi_subsets(n, &a, &b).unwrap().value.to_f64();
            assert!((v - mi(n, r, m)).abs() < 1e-10);
        }
        let a = IndexSet::singleton(3, 1).unwrap();
        assert!(mi_subsets(3, &a, &a).unwrap().value.is_infinite());
        assert!(mi_subsets(4, &a, &a).is_err());
    }

    #[test]
    fn mi_subsets_markov_reduction() {
        // Order statistics form a Markov chain, so I((U1,U2);(U3,U4)) = I(U2;U3).
        let a = IndexSet::new(4, vec![1, 2]).unwrap();
        let b = IndexSet::new(4, vec![3, 4]).unwrap();
        let v = mi_subsets(4, &a, &b).unwrap().value.to_f64();
        assert!((v - mi(4, 2, 3)).abs() < 1e-13);
    }

    #[test]
    fn joint_pdf_examples() {
        let s = IndexSet::new(2, vec![1, 2]).unwrap();
        assert!((joint_pdf_uniform(&s, &[0.3, 0.7]).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(joint_pdf_uniform(&s, &[0.7, 0.3]).unwrap(), 0.0);
        assert_eq!(joint_pdf_uniform(&s, &[0.0, 0.3]).unwrap(), 0.0);
        let s = IndexSet::new(3, vec![1, 3]).unwrap();
        assert!((joint_pdf_uniform(&s, &[0.2, 0.9]).unwrap() - 4.2).abs() < 1e-13);
        assert!(joint_pdf_uniform(&s, &[0.2]).is_err());
        // marginal of U_(r) is Beta(r, n+1−r): n=3, r=2 → 6x(1−x)
        let s = IndexSet::singleton(3, 2).unwrap();
        assert!((joint_pdf_uniform(&s, &[0.25]).unwrap() - 6.0 * 0.25 * 0.75).abs() < 1e-14);
    }

    #[test]
    fn beta_log_expectation_examples() {
        assert!((beta_log_expectation(1, 1, LogMoment::LogU).unwrap() + 1.0).abs() < 1e-14);
        assert!((beta_log_expectation(2, 2, LogMoment::LogU).unwrap() + 0.5).abs() < 1e-14);
        let g = beta_log_expectation(3, 2, LogMoment::LogGap { r: 1 }).unwrap();
        assert!((g + 11.0 / 6.0).abs() < 1e-14);
        // E log(1 − U_(1)) for n=1 is also −1
        let v = beta_log_expectation(1, 1, LogMoment::LogOneMinusU).unwrap();
        assert!((v + 1.0).abs() < 1e-14);
        assert!(beta_log_expectation(3, 2, LogMoment::LogGap { r: 2 }).is_err());
        assert!(beta_log_expectation(3, 4, LogMoment::LogU).is_err());
    }

    #[test]
    fn covariance_examples() {
        assert!((covariance_uniform(1, 1, 1).unwrap() - 1.0 / 12.0).abs() < 1e-16);
        assert!((covariance_uniform(3, 1, 3).unwrap() - 1.0 / 80.0).abs() < 1e-16);
        assert!((covariance_uniform(10, 5, 5).unwrap() - 30.0 / 1452.0).abs() < 1e-16);
        assert!(covariance_uniform(3, 3, 1).is_err());
        assert_eq!(covariance_exponential_min2(2, 1.0).unwrap(), 0.25);
        assert!((covariance_exponential_min2(10, 1.0).unwrap() - 0.01).abs() < 1e-17);
        assert!((covariance_exponential_min2(10, 2.0).unwrap() - 0.0025).abs() < 1e-17);
        assert!(covariance_exponential_min2(1, 1.0).is_err());
        assert!(covariance_exponential_min2(3, 0.0).is_err());
    }
}
