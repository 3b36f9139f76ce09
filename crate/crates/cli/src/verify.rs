//! Verification suites and CSV re-validation.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ordstat::asymptotics::{convergence_row, k_step_forms_agree};
use ordstat::continuous::covariance_exponential_min2;
use ordstat::discrete::{check_upper_bound, mi_min_max_bernoulli};
use ordstat::oracles::{
    enum_mi_bernoulli, enum_mi_discrete, mc_covariance, quad_mi_pair, random_cases,
    CovarianceFamily, OracleKind, OracleReport, RngSpec, DEFAULT_ENUM_BUDGET,
};
use ordstat::special::{t_approx, t_step_approx, TSeqContext};
use serde::Serialize;
use serde_json::json;

use crate::figures::{self, FIG1_HEADER, FIG2_HEADER, FIG3_HEADER};
use crate::format::g15;
use crate::{io_err, write_output, CaseArgs, CliError};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemma1,
    Quadrature,
    Enumeration,
    Bound,
    Covariance,
    All,
    /// Re-validate a CSV previously written by this tool (`--input`).
    Csv,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Quadrature => "quadrature",
            Suite::Enumeration => "enumeration",
            Suite::Bound => "bound",
            Suite::Covariance => "covariance",
            Suite::All => "all",
            Suite::Csv => "csv",
        }
    }
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Size knob. lemma1: largest k (1e5). quadrature: largest n (8, at
    /// most 12). enumeration: outcome budget (1e7). bound: number of random
    /// laws (200). covariance: Monte-Carlo samples (1e7).
    #[arg(long)]
    budget: Option<u64>,
    /// Also write the per-check rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// CSV to re-validate (suite `csv`).
    #[arg(long, required_if_eq("suite", "csv"))]
    input: Option<PathBuf>,
    /// Bernoulli parameter of a fig3 CSV.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Case of a `limit --sweep` CSV.
    #[command(flatten)]
    case: CaseArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub check: String,
    pub passed: bool,
    pub detail: String,
    pub report: Option<OracleReport>,
}

impl Check {
    fn new(suite: &'static str, check: String, passed: bool, detail: String) -> Self {
        Self {
            suite,
            check,
            passed,
            detail,
            report: None,
        }
    }

    fn with_report(mut self, rep: OracleReport) -> Self {
        self.report = Some(rep);
        self
    }
}

pub const REPORT_HEADER: [&str; 12] = [
    "suite",
    "check",
    "passed",
    "closed_form",
    "oracle",
    "abs_diff",
    "rel_diff",
    "oracle_kind",
    "effort",
    "seed",
    "std_error",
    "detail",
];

pub fn run(a: &VerifyArgs, log_base_scale: impl Fn(f64) -> f64) -> Result<(), CliError> {
    let suites: &[Suite] = match a.suite {
        Suite::All => &[
            Suite::Lemma1,
            Suite::Quadrature,
            Suite::Enumeration,
            Suite::Bound,
            Suite::Covariance,
        ],
        ref s => std::slice::from_ref(s),
    };
    let mut checks = Vec::new();
    for &s in suites {
        let part = match s {
            Suite::Lemma1 => lemma1(a.budget.unwrap_or(100_000))?,
            Suite::Quadrature => quadrature(a.budget.unwrap_or(8))?,
            Suite::Enumeration => enumeration(a.seed, a.budget.unwrap_or(DEFAULT_ENUM_BUDGET))?,
            Suite::Bound => bound(a.seed, a.budget.unwrap_or(200))?,
            Suite::Covariance => covariance(a.seed, a.budget.unwrap_or(10_000_000))?,
            Suite::Csv => {
                let path = a.input.as_deref().expect("clap requires --input");
                revalidate(path, a, &log_base_scale)?
            }
            Suite::All => unreachable!(),
        };
        let failed = part.iter().filter(|c| !c.passed).count();
        eprintln!(
            "{}: {} ({} checks, {failed} failed)",
            s.name(),
            if failed == 0 { "PASS" } else { "FAIL" },
            part.len()
        );
        checks.extend(part);
    }
    let passed = checks.iter().all(|c| c.passed);
    if let Some(path) = &a.csv {
        write_output(Some(path), &report_csv(&checks))?;
    }
    let report = json!({
        "command": "verify",
        "suite": a.suite,
        "seed": a.seed,
        "budget": a.budget,
        "passed": passed,
        "checks": checks,
    });
    write_output(
        None,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("serializes")
        ),
    )?;
    if passed {
        Ok(())
    } else {
        let first = checks.iter().find(|c| !c.passed).expect("a failed check");
        Err(CliError::Verification(format!(
            "{} check {} failed: {}",
            first.suite, first.check, first.detail
        )))
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn report_csv(checks: &[Check]) -> String {
    let mut w = figures::csv_writer();
    w.write_record(REPORT_HEADER).expect("in-memory write");
    for c in checks {
        let r = c.report.as_ref();
        w.write_record([
            c.suite.to_string(),
            c.check.clone(),
            c.passed.to_string(),
            opt(r.map(|r| g15(r.closed_form))),
            opt(r.map(|r| g15(r.oracle))),
            opt(r.map(|r| g15(r.abs_diff))),
            opt(r.map(|r| g15(r.rel_diff))),
            opt(r.map(|r| r.oracle_kind)),
            opt(r.map(|r| r.effort)),
            opt(r.and_then(|r| r.seed)),
            opt(r.and_then(|r| r.std_error).map(g15)),
            c.detail.clone(),
        ])
        .expect("in-memory write");
    }
    figures::finish(w)
}

fn lemma1(max_k: u64) -> Result<Vec<Check>, CliError> {
    if max_k == 0 {
        return Err(CliError::Domain("lemma1 budget must be ≥ 1".into()));
    }
    let ctx = TSeqContext::global();
    let (mut bad_t, mut bad_step, mut bad_limit) = (Vec::new(), Vec::new(), Vec::new());
    let mut widest: f64 = 0.0;
    for k in 1..=max_k {
        let b = t_approx(k)?;
        widest = widest.max(b.width());
        if !b.contains_dd(ctx.t_value_dd(k)) {
            bad_t.push(k);
        }
        if !t_step_approx(k)?.contains_dd(ctx.t_step_dd(k)) {
            bad_step.push(k);
        }
        if k <= 10_000 && !k_step_forms_agree(k)? {
            bad_limit.push(k);
        }
    }
    let check = |name: &str, bad: &Vec<u64>, upto: u64| {
        let detail = match bad.first() {
            None => format!("all k in 1..={upto} inside the bracket"),
            Some(k) => format!("{} outside, first at k = {k}", bad.len()),
        };
        Check::new("lemma1", name.into(), bad.is_empty(), detail)
    };
    let mut out = vec![
        check("t-bracket", &bad_t, max_k),
        check("t-step-bracket", &bad_step, max_k),
        check("k-step-limit-bracket", &bad_limit, max_k.min(10_000)),
    ];
    out[0].detail.push_str(&format!(", widest {widest:.2e}"));
    Ok(out)
}

fn quadrature(max_n: u64) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for r in 1..n {
            for m in r + 1..=n {
                let name = format!("mi({n},{r},{m})");
                let c = match quad_mi_pair(n, r, m, 1e-9) {
                    Ok(rep) => Check::new(
                        "quadrature",
                        name,
                        rep.abs_diff < 1e-6,
                        "abs diff < 1e-6".into(),
                    )
                    .with_report(rep),
                    Err(e @ ordstat::Error::Domain(_)) => return Err(e.into()),
                    Err(e) => Check::new("quadrature", name, false, e.to_string()),
                };
                out.push(c);
            }
        }
    }
    Ok(out)
}

fn enumeration(seed: u64, budget: u64) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<Check>, name: String, rep: OracleReport| {
        out.push(
            Check::new(
                "enumeration",
                name,
                rep.abs_diff < 1e-12,
                "abs diff < 1e-12".into(),
            )
            .with_report(rep),
        );
    };
    for n in 2..=12u64 {
        for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
            for r in 1..n {
                for m in r + 1..=n {
                    let rep = enum_mi_bernoulli(n, p, r, m, budget)?;
                    push(&mut out, format!("bernoulli(p={p}) n={n} r={r} m={m}"), rep);
                }
            }
        }
    }
    for (i, c) in random_cases(seed, 50, 8, 4).into_iter().enumerate() {
        let rep = enum_mi_discrete(c.n, &c.dist, c.r, c.m, budget)?;
        push(
            &mut out,
            format!(
                "random#{i} K={} n={} r={} m={}",
                c.dist.len(),
                c.n,
                c.r,
                c.m
            ),
            rep,
        );
    }
    Ok(out)
}

fn bound(seed: u64, count: u64) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for (i, c) in random_cases(seed, count as usize, 8, 5)
        .into_iter()
        .enumerate()
    {
        for r in 1..c.n {
            for m in r + 1..=c.n {
                let b = check_upper_bound(c.n, &c.dist, r, m)?;
                out.push(Check::new(
                    "bound",
                    format!("random#{i} K={} n={} r={r} m={m}", c.dist.len(), c.n),
                    b.holds,
                    format!(
                        "discrete {} <= continuous {} (margin {})",
                        g15(b.discrete),
                        g15(b.continuous),
                        g15(b.margin)
                    ),
                ));
            }
        }
    }
    Ok(out)
}

fn covariance(seed: u64, samples: u64) -> Result<Vec<Check>, CliError> {
    let spec = RngSpec::new(seed, 64)?;
    let mut out = Vec::new();
    let mut push = |name: String, rep: OracleReport, extra_ok: bool| {
        let z = rep.z_score().unwrap_or(f64::INFINITY);
        out.push(
            Check::new(
                "covariance",
                name,
                extra_ok && z <= 4.0,
                format!("z = {z:.2} (limit 4)"),
            )
            .with_report(rep),
        );
    };
    for (n, r, m) in [(3, 1, 3), (10, 5, 5), (10, 2, 9)] {
        let rep = mc_covariance(CovarianceFamily::Uniform, n, r, m, samples, spec)?;
        push(format!("uniform n={n} r={r} m={m}"), rep, true);
    }
    for (n, lambda) in [(2, 1.0), (10, 1.0), (10, 2.0)] {
        let family = CovarianceFamily::Exponential { lambda };
        let rep = mc_covariance(family, n, 1, 2, samples, spec)?;
        let ok = rep.closed_form == covariance_exponential_min2(n, lambda)?;
        push(
            format!("exponential(lambda={lambda}) n={n} r=1 m=2"),
            rep,
            ok,
        );
    }
    Ok(out)
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want.abs()
    }
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let bad = |e: csv::Error| CliError::Domain(format!("{}: malformed CSV: {e}", path.display()));
    let header = rdr
        .headers()
        .map_err(bad)?
        .iter()
        .map(String::from)
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(bad)?;
    Ok((header, rows))
}

fn num(field: &str, what: &str) -> Result<f64, CliError> {
    if field == "inf" {
        return Ok(f64::INFINITY);
    }
    field
        .parse()
        .map_err(|_| CliError::Domain(format!("{what}: {field:?} is not a number")))
}

fn int(field: &str, what: &str) -> Result<u64, CliError> {
    field
        .parse()
        .map_err(|_| CliError::Domain(format!("{what}: {field:?} is not an integer")))
}

/// Recomputes every value in a CSV this tool emitted.
fn revalidate(
    path: &Path,
    a: &VerifyArgs,
    scale: &impl Fn(f64) -> f64,
) -> Result<Vec<Check>, CliError> {
    let (header, rows) = read_csv(path)?;
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = Vec::new();
    let mut cmp = |row: usize, col: &str, got: f64, want: f64, tol: f64| {
        let err = rel_err(got, want);
        out.push(Check::new(
            "csv",
            format!("row {row} {col}"),
            err <= tol,
            format!(
                "file {} vs recomputed {} (rel err {err:.2e}, tol {tol:e})",
                g15(got),
                g15(want)
            ),
        ));
    };
    if header == FIG1_HEADER {
        let case = ordstat::asymptotics::AsymptoticCase::quantile_vs_max(0.5)?;
        for (i, row) in rows.iter().enumerate() {
            let n = int(&row[0], "n")?;
            let want = convergence_row(&case, n)?;
            cmp(
                i + 1,
                "n_times_mi",
                num(&row[1], "n_times_mi")?,
                want.scaled_exact,
                1e-9,
            );
            cmp(i + 1, "limit", num(&row[2], "limit")?, want.limit, 1e-12);
        }
    } else if header == FIG3_HEADER {
        for (i, row) in rows.iter().enumerate() {
            let n = int(&row[0], "n")?;
            let (b, u) = figures::fig3_row(n, a.p)?;
            cmp(
                i + 1,
                "mi_bernoulli",
                num(&row[1], "mi_bernoulli")?,
                b,
                1e-6,
            );
            cmp(i + 1, "mi_uniform", num(&row[2], "mi_uniform")?, u, 1e-9);
        }
    } else if header == FIG2_HEADER {
        for (i, row) in rows.iter().enumerate() {
            let p = num(&row[0], "p")?;
            let n = int(&row[1], "n")?;
            let want = mi_min_max_bernoulli(n, p)?;
            cmp(i + 1, "mi_min_max", num(&row[2], "mi_min_max")?, want, 1e-9);
        }
    } else if header == ["n", "scaled_exact", "limit", "gap"] {
        let case = a.case.build()?;
        for (i, row) in rows.iter().enumerate() {
            let n = int(&row[0], "n")?;
            let want = convergence_row(&case, n)?;
            cmp(
                i + 1,
                "scaled_exact",
                num(&row[1], "scaled_exact")?,
                scale(want.scaled_exact),
                1e-9,
            );
            cmp(
                i + 1,
                "limit",
                num(&row[2], "limit")?,
                scale(want.limit),
                1e-12,
            );
            let gap = num(&row[3], "gap")?;
            let tol = 1e-9 * scale(want.scaled_exact).abs().max(1e-300)
                / scale(want.gap).abs().max(1e-300);
            cmp(i + 1, "gap", gap, scale(want.gap), tol.max(1e-9));
        }
    } else if header == REPORT_HEADER {
        for (i, row) in rows.iter().enumerate() {
            let passed = row[2] == "true";
            let mut detail = format!("{} {}", row[0], row[1]);
            let mut ok = passed;
            if !row[3].is_empty() {
                let closed = num(&row[3], "closed_form")?;
                let oracle = num(&row[4], "oracle")?;
                let abs = num(&row[5], "abs_diff")?;
                let kind: OracleKind = serde_json::from_value(json!(row[7]))
                    .map_err(|e| CliError::Domain(format!("oracle_kind: {e}")))?;
                let consistent =
                    ((closed - oracle).abs() - abs).abs() <= 1e-13 * closed.abs().max(1.0);
                ok &= consistent;
                detail.push_str(&format!(" [{kind}] abs_diff consistent: {consistent}"));
            }
            out.push(Check::new("csv", format!("row {}", i + 1), ok, detail));
        }
    } else {
        return Err(CliError::Domain(format!(
            "{}: unrecognized CSV header {:?}",
            path.display(),
            header.join(",")
        )));
    }
    if out.is_empty() {
        return Err(CliError::Domain(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(out)
}
