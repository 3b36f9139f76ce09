//! Adaptive Gauss–Kronrod quadrature over the unit interval, the ordered
//! triangle and small simplices.
//!
//! Beta-type densities have integrable singularities at 0 and 1 (and log
//! singularities in the MI integrand), so every unit-interval coordinate is
//! reparametrized as `t = 3u² − 2u³`, whose derivative `6u(1−u)` vanishes at
//! both ends. The complement `1 − t = (1−u)²(1+2u)` is formed without
//! cancellation, which keeps `log(1 − t)` accurate near `t = 1`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::continuous::{joint_pdf_uniform, kl_subset, mi_pair, mi_subsets, IndexSet};
use crate::error::{domain, Error, Result};
use crate::special::TSeqContext;

use super::{OracleKind, OracleReport};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel: `(estimate, |K15 − G7|)`.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOutcome {
    pub value: f64,
    pub error: f64,
    pub evals: u64,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection driven by the largest panel error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: u64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_evals: 10_000_000,
        }
    }
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> QuadOutcome {
        let (value, error) = gauss_kronrod(&mut f, a, b);
        let mut evals = 15;
        let mut heap = BinaryHeap::new();
        heap.push(Panel { a, b, value, error });
        let (mut total, mut total_err) = (value, error);
        let mut converged = true;
        while total_err > self.abs_tol.max(self.rel_tol * total.abs()) {
            if evals + 30 > self.max_evals {
                converged = false;
                break;
            }
            let worst = heap.pop().expect("heap never empties");
            let mid = 0.5 * (worst.a + worst.b);
            if !(worst.a < mid && mid < worst.b) {
                // cannot split further; accept what we have
                heap.push(worst);
                converged = false;
                break;
            }
            let (lv, le) = gauss_kronrod(&mut f, worst.a, mid);
            let (rv, re) = gauss_kronrod(&mut f, mid, worst.b);
            evals += 30;
            heap.push(Panel {
                a: worst.a,
                b: mid,
                value: lv,
                error: le,
            });
            heap.push(Panel {
                a: mid,
                b: worst.b,
                value: rv,
                error: re,
            });
            // re-sum to avoid drift from repeated add/subtract
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
        QuadOutcome {
            value: total,
            error: total_err,
            evals,
            converged,
        }
    }
}

/// `t = 3u² − 2u³` together with `1 − t`, `log t`, `log(1 − t)` and `dt/du`.
#[derive(Debug, Clone, Copy)]
struct Smooth {
    t: f64,
    one_minus_t: f64,
    ln_t: f64,
    ln_one_minus_t: f64,
    jac: f64,
}

fn smooth(u: f64) -> Smooth {
    let v = 1.0 - u;
    Smooth {
        t: u * u * (3.0 - 2.0 * u),
        one_minus_t: v * v * (1.0 + 2.0 * u),
        ln_t: 2.0 * u.ln() + (3.0 - 2.0 * u).ln(),
        ln_one_minus_t: 2.0 * v.ln() + (2.0 * u).ln_1p(),
        jac: 6.0 * u * v,
    }
}

fn ln_fact(k: u64) -> f64 {
    TSeqContext::global().log_factorial(k)
}

fn non_convergence(out: &QuadOutcome) -> Error {
    Error::QuadratureNonConvergence {
        estimate: out.value,
        error_estimate: out.error,
        evaluations: out.evals as usize,
    }
}

const MAX_QUAD_N: u64 = 12;

/// Two-dimensional quadrature of `f log(f / (f_r f_m))` over `0 < x < y < 1`.
pub fn quad_mi_pair(n: u64, r: u64, m: u64, tol: f64) -> Result<OracleReport> {
    if !(1 <= r && r < m && m <= n) {
        return Err(domain(format!(
            "need 1 ≤ r < m ≤ n, got n = {n}, r = {r}, m = {m}"
        )));
    }
    if n > MAX_QUAD_N {
        return Err(domain(format!(
            "quadrature oracle is limited to n ≤ {MAX_QUAD_N}, got {n}"
        )));
    }
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let closed = mi_pair(n, r, m)?.value.to_f64();

    let (rf, mf, nf) = (r as f64, m as f64, n as f64);
    let ln_c = ln_fact(n) - ln_fact(r - 1) - ln_fact(m - r - 1) - ln_fact(n - m);
    let ln_cr = ln_fact(n) - ln_fact(r - 1) - ln_fact(n - r);
    let ln_cm = ln_fact(n) - ln_fact(m - 1) - ln_fact(n - m);

    let inner_q = Quadrature::with_tol(tol * 1e-2);
    let outer_q = Quadrature::with_tol(tol);
    let mut inner_evals = 0u64;
    let mut inner_failed = false;

    // x = y·s, dx = y ds
    let outer = outer_q.integrate(
        |u| {
            let y = smooth(u);
            let ln_fm = ln_cm + (mf - 1.0) * y.ln_t + (nf - mf) * y.ln_one_minus_t;
            let inner = inner_q.integrate(
                |v| {
                    let s = smooth(v);
                    let ln_x = y.ln_t + s.ln_t;
                    let ln_gap = y.ln_t + s.ln_one_minus_t;
                    let one_minus_x = y.one_minus_t + y.t * s.one_minus_t;
                    let ln_f = ln_c
                        + (rf - 1.0) * ln_x
                        + (mf - rf - 1.0) * ln_gap
                        + (nf - mf) * y.ln_one_minus_t;
                    let ln_fr = ln_cr + (rf - 1.0) * ln_x + (nf - rf) * one_minus_x.ln();
                    let f = ln_f.exp();
                    if f == 0.0 {
                        return 0.0;
                    }
                    f * (ln_f - ln_fr - ln_fm) * s.jac
                },
                0.0,
                1.0,
            );
            inner_evals += inner.evals;
            inner_failed |= !inner.converged;
            inner.value * y.t * y.jac
        },
        0.0,
        1.0,
    );
    let evals = outer.evals + inner_evals;
    if !outer.converged || inner_failed {
        return Err(Error::QuadratureNonConvergence {
            estimate: outer.value,
            error_estimate: outer.error,
            evaluations: evals as usize,
        });
    }
    Ok(OracleReport::new(
        closed,
        outer.value,
        OracleKind::Quadrature,
        evals,
    ))
}

/// `E[log X]` (or `E[log(1 − X)]` when `complement`) for `X ~ Beta(a, b)`,
/// integer `a, b ≥ 1`.
fn beta_log_moment(a: u64, b: u64, complement: bool, q: &Quadrature) -> QuadOutcome {
    let ln_norm = ln_fact(a + b - 1) - ln_fact(a - 1) - ln_fact(b - 1);
    let (af, bf) = (a as f64, b as f64);
    q.integrate(
        |u| {
            let x = smooth(u);
            let ln_pdf = ln_norm + (af - 1.0) * x.ln_t + (bf - 1.0) * x.ln_one_minus_t;
            let g = if complement { x.ln_one_minus_t } else { x.ln_t };
            ln_pdf.exp() * g * x.jac
        },
        0.0,
        1.0,
    )
}

/// Quadrature value of `E[log U_(m)]`-type moments for comparison with
/// [`crate::continuous::beta_log_expectation`].
pub fn quad_beta_log_expectation(
    n: u64,
    m: u64,
    kind: crate::continuous::LogMoment,
    tol: f64,
) -> Result<OracleReport> {
    use crate::continuous::{beta_log_expectation, LogMoment};
    let closed = beta_log_expectation(n, m, kind)?;
    let q = Quadrature::with_tol(tol);
    let out = match kind {
        LogMoment::LogU => beta_log_moment(m, n + 1 - m, false, &q),
        LogMoment::LogOneMinusU => beta_log_moment(m, n + 1 - m, true, &q),
        LogMoment::LogGap { r } => beta_log_moment(m - r, n + 1 - m + r, false, &q),
    };
    if !out.converged {
        return Err(non_convergence(&out));
    }
    Ok(OracleReport::new(
        closed,
        out.value,
        OracleKind::Quadrature,
        out.evals,
    ))
}

// KL(I) by linearity of expectation: every log term of the joint and
// marginal densities is a log-moment of a Beta variable.
fn quad_kl_value(idx: &IndexSet, q: &Quadrature) -> Result<(f64, u64)> {
    let n = idx.n();
    let aug: Vec<u64> = idx.augmented().collect();
    let mut evals = 0u64;
    let mut moment = |a: u64, complement: bool| -> Result<f64> {
        let out = beta_log_moment(a, n + 1 - a, complement, q);
        evals += out.evals;
        if !out.converged {
            return Err(non_convergence(&out));
        }
        Ok(out.value)
    };

    let mut joint = ln_fact(n);
    let last = aug.len() - 1;
    for t in 1..aug.len() {
        let gap = aug[t] - aug[t - 1];
        joint -= ln_fact(gap - 1);
        if gap > 1 {
            let e = if t == last {
                // log(1 − U_(i_k))
                moment(aug[t - 1], true)?
            } else {
                // U_(i_t) − U_(i_{t−1}) ~ Beta(gap, n + 1 − gap)
                moment(gap, false)?
            };
            joint += (gap - 1) as f64 * e;
        }
    }
    let mut marginals = 0.0;
    for &i in idx.indices() {
        marginals += ln_fact(n) - ln_fact(i - 1) - ln_fact(n - i);
        if i > 1 {
            marginals += (i - 1) as f64 * moment(i, false)?;
        }
        if i < n {
            marginals += (n - i) as f64 * moment(i, true)?;
        }
    }
    Ok((joint - marginals, evals))
}

pub fn quad_kl_subset(idx: &IndexSet, tol: f64) -> Result<OracleReport> {
    if idx.n() > MAX_QUAD_N {
        return Err(domain(format!(
            "quadrature oracle is limited to n ≤ {MAX_QUAD_N}"
        )));
    }
    let (v, evals) = quad_kl_value(idx, &Quadrature::with_tol(tol))?;
    Ok(OracleReport::new(
        kl_subset(idx),
        v,
        OracleKind::Quadrature,
        evals,
    ))
}

pub fn quad_mi_subsets(n: u64, a: &IndexSet, b: &IndexSet, tol: f64) -> Result<OracleReport> {
    if n > MAX_QUAD_N {
        return Err(domain(format!(
            "quadrature oracle is limited to n ≤ {MAX_QUAD_N}"
        )));
    }
    let closed = mi_subsets(n, a, b)?;
    let Some(closed) = closed.value.finite() else {
        return Err(domain(
            "index sets overlap; the mutual information is infinite",
        ));
    };
    let q = Quadrature::with_tol(tol);
    let (ab, e1) = quad_kl_value(&a.union(b)?, &q)?;
    let (ka, e2) = quad_kl_value(a, &q)?;
    let (kb, e3) = quad_kl_value(b, &q)?;
    Ok(OracleReport::new(
        closed,
        ab - ka - kb,
        OracleKind::Quadrature,
        e1 + e2 + e3,
    ))
}

/// Total mass of the joint density of `U_(I)` over its ordered support,
/// by nested quadrature with `x_j = x_{j+1}·s_j`. Limited to `|I| ≤ 3`.
pub fn simplex_mass(idx: &IndexSet, tol: f64) -> Result<(f64, u64)> {
    let k = idx.len();
    if k > 3 {
        return Err(domain(format!(
            "simplex quadrature supports at most 3 indices, got {k}"
        )));
    }
    let q = Quadrature::with_tol(tol);
    let mut point = vec![0.0; k];
    let mut evals = 0u64;
    let mut failed = false;
    let v = simplex_level(idx, &q, k, 1.0, &mut point, &mut evals, &mut failed)?;
    if failed {
        return Err(Error::QuadratureNonConvergence {
            estimate: v,
            error_estimate: f64::NAN,
            evaluations: evals as usize,
        });
    }
    Ok((v, evals))
}

fn simplex_level(
    idx: &IndexSet,
    q: &Quadrature,
    level: usize,
    upper: f64,
    point: &mut Vec<f64>,
    evals: &mut u64,
    failed: &mut bool,
) -> Result<f64> {
    if level == 0 {
        return joint_pdf_uniform(idx, point);
    }
    let mut err = None;
    let out = q.integrate(
        |u| {
            let s = smooth(u);
            point[level - 1] = upper * s.t;
            match simplex_level(idx, q, level - 1, upper * s.t, point, evals, failed) {
                Ok(v) => v * upper * s.jac,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
    );
    if let Some(e) = err {
        return Err(e);
    }
    *evals += out.evals;
    *failed |= !out.converged;
    Ok(out.value)
}
