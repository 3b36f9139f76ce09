//! Large-n limits of the pairwise mutual information and how fast pairs decouple.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuous::mi_pair;
use crate::error::{domain, Result};
use crate::special::{c_bracket, BracketedValue, DoubleDouble, TSeqContext};

/// Normalization under which a limit is finite and nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    None,
    N,
    NSquared,
}

impl Scale {
    pub fn factor(self, n: u64) -> f64 {
        let nf = n as f64;
        match self {
            Scale::None => 1.0,
            Scale::N => nf,
            Scale::NSquared => nf * nf,
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::None => "none",
            Scale::N => "n",
            Scale::NSquared => "n-squared",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum AsymptoticCase {
    /// `(X_(r), X_(n))` with `r` fixed.
    RVsMax { r: u64 },
    /// `(X_(r), X_(m))` with both fixed.
    RVsM { r: u64, m: u64 },
    /// `(X_(n−k), X_(n))`.
    KStep { k: u64 },
    /// `(X_(⌊αn⌋), X_(⌈βn⌉))`.
    QuantilePair { alpha: f64, beta: f64 },
    /// `(X_(⌊αn⌋), X_(n))`.
    QuantileVsMax { alpha: f64 },
}

impl AsymptoticCase {
    pub fn r_vs_max(r: u64) -> Result<Self> {
        Self::RVsMax { r }.validated()
    }

    pub fn r_vs_m(r: u64, m: u64) -> Result<Self> {
        Self::RVsM { r, m }.validated()
    }

    pub fn k_step(k: u64) -> Result<Self> {
        Self::KStep { k }.validated()
    }

    pub fn quantile_pair(alpha: f64, beta: f64) -> Result<Self> {
        Self::QuantilePair { alpha, beta }.validated()
    }

    pub fn quantile_vs_max(alpha: f64) -> Result<Self> {
        Self::QuantileVsMax { alpha }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Self::RVsMax { r: 0 } => Err(domain("r-vs-max requires r ≥ 1")),
            Self::RVsM { r, m } if r == 0 || r >= m => Err(domain(format!(
                "r-vs-m requires 1 ≤ r < m, got r = {r}, m = {m}"
            ))),
            Self::KStep { k: 0 } => Err(domain("k-step requires k ≥ 1")),
            Self::QuantilePair { alpha, beta } if !(0.0 < alpha && alpha < beta && beta < 1.0) => {
                Err(domain(format!(
                    "quantile-pair requires 0 < alpha < beta < 1, got alpha = {alpha}, beta = {beta}"
                )))
            }
            Self::QuantileVsMax { alpha } if !(0.0 < alpha && alpha < 1.0) => Err(domain(format!(
                "quantile-vs-max requires 0 < alpha < 1, got alpha = {alpha}"
            ))),
            ok => Ok(ok),
        }
    }

    pub fn case_id(&self) -> &'static str {
        match self {
            Self::RVsMax { .. } => "r-vs-max",
            Self::RVsM { .. } => "r-vs-m",
            Self::KStep { .. } => "k-step",
            Self::QuantilePair { .. } => "quantile-pair",
            Self::QuantileVsMax { .. } => "quantile-vs-max",
        }
    }

    pub fn scale(&self) -> Scale {
        match self {
            Self::RVsMax { .. } => Scale::NSquared,
            Self::QuantileVsMax { .. } => Scale::N,
            _ => Scale::None,
        }
    }

    /// Row of the decoupling-rate table this case belongs to (1–5).
    pub fn table_row(&self) -> u8 {
        match self {
            Self::RVsMax { .. } => 1,
            Self::RVsM { .. } => 2,
            Self::KStep { .. } => 3,
            Self::QuantilePair { .. } => 4,
            Self::QuantileVsMax { .. } => 5,
        }
    }

    pub fn limit(&self) -> Result<f64> {
        match *self {
            Self::RVsMax { r } => limit_r_vs_max(r),
            Self::RVsM { r, m } => limit_fixed_pair(r, m),
            Self::KStep { k } => limit_k_step(k),
            Self::QuantilePair { alpha, beta } => limit_quantile_pair(alpha, beta),
            Self::QuantileVsMax { alpha } => limit_quantile_vs_max(alpha),
        }
    }

    /// The pair `(r, m)` this case selects at sample size `n`. Sizes for
    /// which the floor/ceiling produce an invalid pair are rejected.
    pub fn indices(&self, n: u64) -> Result<(u64, u64)> {
        let (r, m) = match *self {
            Self::RVsMax { r } => (r, n),
            Self::RVsM { r, m } => (r, m),
            Self::KStep { k } => (n.saturating_sub(k), n),
            Self::QuantilePair { alpha, beta } => (floor_index(alpha, n), ceil_index(beta, n)),
            Self::QuantileVsMax { alpha } => (floor_index(alpha, n), n),
        };
        if r == 0 || r >= m || m > n {
            return Err(domain(format!(
                "{} has no valid pair at n = {n} (got r = {r}, m = {m}; need 1 ≤ r < m ≤ n)",
                self.case_id()
            )));
        }
        Ok((r, m))
    }
}

// αn is computed in floating point, so e.g. 0.29·100 = 28.999…; nudge by a
// few ulps before rounding.
fn nudge(x: f64) -> f64 {
    8.0 * f64::EPSILON * x.abs().max(1.0)
}

/// `⌊αn⌋`, robust to representation error in `α·n`.
pub fn floor_index(alpha: f64, n: u64) -> u64 {
    let x = alpha * n as f64;
    (x + nudge(x)).floor().max(0.0) as u64
}

/// `⌈βn⌉`, robust to representation error in `β·n`.
pub fn ceil_index(beta: f64, n: u64) -> u64 {
    let x = beta * n as f64;
    (x - nudge(x)).ceil().max(0.0) as u64
}

/// `lim n²·I(X_(r); X_(n)) = r/2`.
pub fn limit_r_vs_max(r: u64) -> Result<f64> {
    if r == 0 {
        return Err(domain("r-vs-max requires r ≥ 1"));
    }
    Ok(r as f64 / 2.0)
}

/// `lim I(X_(r); X_(m)) = T_{m−1} − T_{m−r−1} + (1+γ)r` for fixed `r < m`.
pub fn limit_fixed_pair(r: u64, m: u64) -> Result<f64> {
    if r == 0 || r >= m {
        return Err(domain(format!(
            "fixed pair requires 1 ≤ r < m, got r = {r}, m = {m}"
        )));
    }
    let ctx = TSeqContext::global();
    let v = ctx.t_diff_dd(m - r - 1, m - 1) + (DoubleDouble::EULER_GAMMA + 1.0) * r as f64;
    Ok(v.to_f64())
}

fn k_step_dd(k: u64) -> DoubleDouble {
    let ctx = TSeqContext::global();
    DoubleDouble::from_u64(k).ln() - ctx.harmonic_dd(k - 1) + DoubleDouble::EULER_GAMMA
}

/// `lim I(X_(n−k); X_(n)) = log k − H_{k−1} + γ`.
pub fn limit_k_step(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(domain("k-step requires k ≥ 1"));
    }
    Ok(k_step_dd(k).to_f64())
}

/// The k-step limit written as `log(k/(k+½)) + 1/k − c`, with `c` replaced
/// by its bracket `1/(24(k+1)²) ≤ c ≤ 1/(24k²)`.
pub fn limit_k_step_bracket(k: u64) -> Result<BracketedValue> {
    if k == 0 {
        return Err(domain("k-step requires k ≥ 1"));
    }
    let kd = DoubleDouble::from_u64(k);
    let base = (kd * 2.0).ln() - (kd * 2.0 + 1.0).ln() + kd.recip();
    let (c_lo, c_hi) = c_bracket(k - 1);
    Ok(BracketedValue::from_dd(
        k_step_dd(k),
        base - c_hi,
        base - c_lo,
    ))
}

/// Whether the exact k-step limit lies inside the bracket of its second form.
pub fn k_step_forms_agree(k: u64) -> Result<bool> {
    Ok(limit_k_step_bracket(k)?.contains_dd(k_step_dd(k)))
}

/// `lim I(X_(⌊αn⌋); X_(⌈βn⌉)) = ½ log(β(1−α)/(β−α))`.
pub fn limit_quantile_pair(alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0 < alpha && alpha < beta && beta < 1.0) {
        return Err(domain(format!(
            "quantile-pair requires 0 < alpha < beta < 1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    // β(1−α)/(β−α) = 1 + α(1−β)/(β−α)
    Ok(0.5 * (alpha * (1.0 - beta) / (beta - alpha)).ln_1p())
}

/// `lim n·I(X_(⌊αn⌋); X_(n)) = α/(2(1−α))`.
pub fn limit_quantile_vs_max(alpha: f64) -> Result<f64> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(domain(format!(
            "quantile-vs-max requires 0 < alpha < 1, got alpha = {alpha}"
        )));
    }
    Ok(alpha / (2.0 * (1.0 - alpha)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rate {
    NCubed,
    NSquared,
    N,
    /// The quantity tends to a positive constant.
    None,
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rate::NCubed => "n-cubed",
            Rate::NSquared => "n-squared",
            Rate::N => "n",
            Rate::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecouplingRate {
    pub mi: Rate,
    pub covariance: Rate,
}

/// Decay rates `1/n^a` of MI and covariance for each case.
pub fn decoupling_rate(case: &AsymptoticCase) -> DecouplingRate {
    let (mi, covariance) = match case {
        AsymptoticCase::RVsMax { .. } => (Rate::NSquared, Rate::NCubed),
        AsymptoticCase::RVsM { .. } | AsymptoticCase::KStep { .. } => (Rate::None, Rate::NSquared),
        AsymptoticCase::QuantilePair { .. } => (Rate::None, Rate::N),
        AsymptoticCase::QuantileVsMax { .. } => (Rate::N, Rate::NSquared),
    };
    DecouplingRate { mi, covariance }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub r: u64,
    pub m: u64,
    pub scaled_exact: f64,
    pub limit: f64,
    pub gap: f64,
}

pub fn convergence_row(case: &AsymptoticCase, n: u64) -> Result<ConvergenceRow> {
    let case = case.validated()?;
    let limit = case.limit()?;
    let (r, m) = case.indices(n)?;
    let exact = mi_pair(n, r, m)?.value.to_f64();
    let scaled_exact = exact * case.scale().factor(n);
    Ok(ConvergenceRow {
        n,
        r,
        m,
        scaled_exact,
        limit,
        gap: (scaled_exact - limit).abs(),
    })
}

/// Exact scaled MI against the limit for each `n`, in input order.
pub fn convergence_table(case: &AsymptoticCase, n_values: &[u64]) -> Result<Vec<ConvergenceRow>> {
    let case = case.validated()?;
    n_values
        .par_iter()
        .map(|&n| convergence_row(&case, n))
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(domain("slope fit needs at least two points"));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(domain("slope fit needs strictly positive coordinates"));
    }
    let k = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / k, sy / k);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x.ln() - mx;
        sxy += dx * (y.ln() - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(domain("slope fit needs at least two distinct x values"));
    }
    Ok(sxy / sxx)
}
