//! Order statistics of samples from finitely supported distributions.
//!
//! Unlike the continuous case these mutual informations depend on the
//! sampling law. They are still bounded by the continuous value for the
//! same `(n, r, m)`, because `X_(k) = F⁻¹(U_(k))` is a coordinatewise map
//! of the uniform order statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuous::mi_pair;
use crate::error::{domain, Error, Result};
use crate::special::TSeqContext;

#[derive(Debug, Clone, Deserialize)]
struct RawDist {
    support: Vec<f64>,
    probs: Vec<f64>,
}

/// Finite-support law with strictly increasing support points.
///
/// Probabilities are renormalized on construction so that they sum to 1
/// as closely as floating point allows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist")]
pub struct DiscreteDist {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawDist> for DiscreteDist {
    type Error = Error;

    fn try_from(raw: RawDist) -> Result<Self> {
        DiscreteDist::new(raw.support, raw.probs)
    }
}

impl DiscreteDist {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(domain("distribution needs at least one support point"));
        }
        if support.len() != probs.len() {
            return Err(domain(format!(
                "support has {} points but probs has {} entries",
                support.len(),
                probs.len()
            )));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(domain("support points must be finite"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("support must be strictly increasing"));
        }
        if let Some(p) = probs.iter().find(|&&p| !(p > 0.0) || !p.is_finite()) {
            return Err(domain(format!("every probability must be > 0, found {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!(
                "probabilities must sum to 1 within 1e-12, got {total:.17}"
            )));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(Self { support, probs })
    }

    /// Law on `{0, 1}` with `P(X = 1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        check_p(p)?;
        Self::new(vec![0.0, 1.0], vec![1.0 - p, p])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `F(v_i)` for `i = 0..K` (0-based), summed from below.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *out.last_mut().unwrap() = 1.0;
        out
    }

    /// `P(X > v_i)`, summed from above so small upper tails keep their precision.
    pub fn survival(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = vec![0.0; self.len()];
        for i in (0..self.len()).rev() {
            out[i] = acc;
            acc += self.probs[i];
        }
        out
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!(
            "Bernoulli parameter p must lie in (0, 1), got {p}"
        )));
    }
    Ok(())
}

fn check_pair(n: u64, r: u64, m: u64) -> Result<()> {
    if n == 0 {
        return Err(domain("sample size n must be ≥ 1"));
    }
    if r == m {
        return Err(domain(format!(
            "r = m = {r}: mutual information of an order statistic with itself is not supported"
        )));
    }
    if !(1 <= r && r < m && m <= n) {
        return Err(domain(format!(
            "need 1 ≤ r < m ≤ n, got n = {n}, r = {r}, m = {m}"
        )));
    }
    Ok(())
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.filter(|t| *t > f64::NEG_INFINITY).collect();
    let Some(max) = terms.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    let s: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + s.ln()
}

/// `log P(lo ≤ B < hi)` for `B ~ Binomial(n, q)`, given `log q` and
/// `log(1 − q)` separately so that neither is formed by subtraction.
fn binomial_log_range(n: u64, ln_q: f64, ln_1mq: f64, lo: u64, hi: u64) -> f64 {
    let hi = hi.min(n + 1);
    if lo >= hi {
        return f64::NEG_INFINITY;
    }
    let ctx = TSeqContext::global();
    let term = |j: u64| {
        let a = if j == 0 { 0.0 } else { j as f64 * ln_q };
        let b = if j == n { 0.0 } else { (n - j) as f64 * ln_1mq };
        ctx.ln_binomial(n, j) + a + b
    };
    log_sum_exp((lo..hi).map(term))
}

fn ln_q_pair(q: f64) -> (f64, f64) {
    (q.ln(), (-q).ln_1p())
}

/// `P(B ≥ k)` for `B ~ Binomial(n, q)`, `0 ≤ k ≤ n + 1`.
///
/// The smaller of the two tails is summed from positive log-space terms,
/// so tiny tails keep full relative precision and large ones never exceed 1.
pub fn binomial_tail(n: u64, q: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(domain(format!(
            "success probability q must lie in [0, 1], got {q}"
        )));
    }
    if k > n + 1 {
        return Err(domain(format!(
            "tail index k must lie in [0, n + 1], got k = {k}, n = {n}"
        )));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if k == n + 1 {
        return Ok(0.0);
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    let (lq, l1q) = ln_q_pair(q);
    let upper = binomial_log_range(n, lq, l1q, k, n + 1);
    if upper > -std::f64::consts::LN_2 {
        // the lower tail is the smaller one
        Ok(-binomial_log_range(n, lq, l1q, 0, k).exp_m1())
    } else {
        Ok(upper.exp())
    }
}

// For an event with probability near 1, log P is better taken as
// log1p(−P(complement)) than as the log of a sum close to 1.
fn ln_from_complement(ln_event: f64, ln_complement: f64) -> f64 {
    if ln_event > -std::f64::consts::LN_2 {
        (-ln_complement.exp()).ln_1p()
    } else {
        ln_event
    }
}

// x·log y with 0·log(anything) = 0.
fn xlogy(x: f64, log_y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * log_y
    }
}

/// `I(X_(r); X_(m))` for a Bernoulli(p) sample, `r < m`.
///
/// With `B ~ Binomial(n, 1−p)` the number of zeros, `X_(k) = 0` iff `B ≥ k`,
/// which gives a three-cell joint law.
pub fn mi_bernoulli(n: u64, p: f64, r: u64, m: u64) -> Result<f64> {
    check_p(p)?;
    check_pair(n, r, m)?;
    // zeros have probability q = 1 − p
    let (lq, l1q) = (((-p).ln_1p()), p.ln());
    let range = |lo, hi| binomial_log_range(n, lq, l1q, lo, hi);
    let ln_b = range(m, n + 1); // P(B ≥ m)
    let ln_ab = range(r, m); // P(r ≤ B < m)
    let ln_1a = range(0, r); // P(B < r)
    let ln_a = ln_from_complement(range(r, n + 1), ln_1a);
    let ln_1b = ln_from_complement(range(0, m), ln_b);
    let (b, ab, one_a) = (ln_b.exp(), ln_ab.exp(), ln_1a.exp());
    let v = -xlogy(b, ln_a) + xlogy(ab, ln_ab - ln_a - ln_1b) - xlogy(one_a, ln_1b);
    Ok(v.max(0.0))
}

/// `I(X_(1); X_(n))` for a Bernoulli(p) sample, written in `pⁿ` and `(1−p)ⁿ`.
pub fn mi_min_max_bernoulli(n: u64, p: f64) -> Result<f64> {
    check_p(p)?;
    if n < 2 {
        return Err(domain(format!("min vs max needs n ≥ 2, got {n}")));
    }
    let nf = n as f64;
    let (ln_p, ln_1p) = (p.ln(), (-p).ln_1p());
    let pn = (nf * ln_p).exp();
    let qn = (nf * ln_1p).exp();
    let one_minus_pn = -(nf * ln_p).exp_m1();
    let one_minus_qn = -(nf * ln_1p).exp_m1();
    let mid = one_minus_pn - qn;
    let v = -xlogy(qn, one_minus_pn.ln()) - xlogy(pn, one_minus_qn.ln())
        + xlogy(mid, mid.ln() - one_minus_pn.ln() - one_minus_qn.ln());
    Ok(v.max(0.0))
}

/// Joint law of `(X_(r), X_(m))`, `r < m`, on the `K × K` support grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPMF2 {
    pub n: u64,
    pub r: u64,
    pub m: u64,
    /// `table[i][j] = P(X_(r) = v_i, X_(m) = v_j)`
    pub table: Vec<Vec<f64>>,
}

impl JointPMF2 {
    pub fn marginal_r(&self) -> Vec<f64> {
        self.table.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_m(&self) -> Vec<f64> {
        let k = self.table.len();
        (0..k)
            .map(|j| self.table.iter().map(|row| row[j]).sum())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.table.iter().flatten().sum()
    }

    pub fn mutual_information(&self) -> f64 {
        mi_from_table(&self.table)
    }
}

/// Mutual information of a joint pmf given as a square table, 0·log 0 = 0.
pub fn mi_from_table(table: &[Vec<f64>]) -> f64 {
    let k = table.len();
    let row: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<f64> = (0..k).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut acc = 0.0;
    for i in 0..k {
        for j in 0..k {
            let p = table[i][j];
            if p > 0.0 {
                acc += p * (p.ln() - row[i].ln() - col[j].ln());
            }
        }
    }
    acc.max(0.0)
}

/// `P(X_(r) ≤ v_a, X_(m) ≤ v_b)` for 0-based `a ≤ b`.
///
/// With `N1 = #{X ≤ v_a}` and, given `N1 = i`, the remaining `n − i` draws
/// landing in `(v_a, v_b]` with probability `q = P(v_a < X ≤ v_b)/P(X > v_a)`:
/// `Σ_{i ≥ r} P(N1 = i) P(Binomial(n − i, q) ≥ m − i)`.
fn bivariate_cdf(n: u64, r: u64, m: u64, cdf: &[f64], surv: &[f64], a: usize, b: usize) -> f64 {
    let (fa, sa) = (cdf[a], surv[a]);
    if sa == 0.0 {
        // everything is ≤ v_a
        return 1.0;
    }
    let (ln_fa, ln_sa) = (fa.ln(), sa.ln());
    let mid = sa - surv[b];
    let ctx = TSeqContext::global();
    let mut acc = 0.0;
    for i in r..=n {
        let ln_n1 = ctx.ln_binomial(n, i)
            + if i == 0 { 0.0 } else { i as f64 * ln_fa }
            + if i == n { 0.0 } else { (n - i) as f64 * ln_sa };
        let rest = n - i;
        let need = m.saturating_sub(i);
        let tail = if need == 0 {
            0.0
        } else if mid <= 0.0 {
            f64::NEG_INFINITY
        } else if surv[b] == 0.0 {
            if need <= rest {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            binomial_log_range(rest, (mid / sa).ln(), (surv[b] / sa).ln(), need, rest + 1)
        };
        acc += (ln_n1 + tail).exp();
    }
    acc
}

/// Exact joint pmf of `(X_(r), X_(m))` by 2-D differencing of the bivariate cdf.
pub fn joint_pmf(n: u64, dist: &DiscreteDist, r: u64, m: u64) -> Result<JointPMF2> {
    check_pair(n, r, m)?;
    let k = dist.len();
    let cdf = dist.cdf();
    let surv = dist.survival();
    let tail_m: Vec<f64> = cdf
        .iter()
        .zip(&surv)
        .map(|(&f, &s)| {
            if s == 0.0 {
                1.0
            } else {
                binomial_log_range(n, f.ln(), s.ln(), m, n + 1).exp()
            }
        })
        .collect();
    // g[a][b] = G(a, b); for a > b, G(a, b) = P(X_(m) ≤ v_b).
    let g: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|a| {
            (0..k)
                .map(|b| {
                    if a <= b {
                        bivariate_cdf(n, r, m, &cdf, &surv, a, b)
                    } else {
                        tail_m[b]
                    }
                })
                .collect()
        })
        .collect();
    let at = |a: usize, b: usize| g[a][b];
    let mut table = vec![vec![0.0; k]; k];
    for (a, row) in table.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let mut v = at(a, b);
            if a > 0 {
                v -= at(a - 1, b);
            }
            if b > 0 {
                v -= at(a, b - 1);
            }
            if a > 0 && b > 0 {
                v += at(a - 1, b - 1);
            }
            if v < 0.0 {
                if v < -1e-12 {
                    return Err(Error::Consistency(format!(
                        "joint pmf cell ({a}, {b}) is {v:e} after differencing"
                    )));
                }
                v = 0.0;
            }
            *cell = v;
        }
    }
    Ok(JointPMF2 { n, r, m, table })
}

/// Exact `I(X_(r); X_(m))` for an arbitrary finite-support sampling law.
pub fn mi_discrete_exact(n: u64, dist: &DiscreteDist, r: u64, m: u64) -> Result<f64> {
    check_pair(n, r, m)?;
    if dist.len() == 1 {
        return Ok(0.0);
    }
    Ok(joint_pmf(n, dist, r, m)?.mutual_information())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub holds: bool,
    pub margin: f64,
    pub continuous: f64,
    pub discrete: f64,
}

/// Compares the discrete MI against the continuous value for the same indices.
pub fn check_upper_bound(n: u64, dist: &DiscreteDist, r: u64, m: u64) -> Result<BoundCheck> {
    check_pair(n, r, m)?;
    let continuous = mi_pair(n, r, m)?.value.to_f64();
    let discrete = mi_discrete_exact(n, dist, r, m)?;
    let margin = continuous - discrete;
    Ok(BoundCheck {
        holds: margin >= -1e-10,
        margin,
        continuous,
        discrete,
    })
}
