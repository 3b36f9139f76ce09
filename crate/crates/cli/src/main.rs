mod figures;
mod format;
mod verify;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ordstat::asymptotics::{convergence_table, decoupling_rate, AsymptoticCase};
use ordstat::continuous::{
    kl_min_max, kl_subset, kl_whole_sequence, mi_pair, mi_subsets, IndexSet,
};
use ordstat::discrete::{check_upper_bound, mi_bernoulli, mi_discrete_exact, DiscreteDist};
use serde_json::{json, Value};

use crate::format::{g15, json_num, OutputRecord};

#[derive(Parser)]
#[command(
    name = "ordstat",
    version,
    about = "Information measures between order statistics"
)]
struct Cli {
    /// Print a JSON record instead of the bare value.
    #[arg(long, global = true)]
    json: bool,

    /// Logarithm base for information values.
    #[arg(long, global = true, value_enum, default_value = "e")]
    log_base: LogBase,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogBase {
    #[value(name = "e")]
    E,
    #[value(name = "2")]
    Two,
    #[value(name = "10")]
    Ten,
}

impl LogBase {
    fn scale(self, nats: f64) -> f64 {
        match self {
            LogBase::E => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
            LogBase::Ten => nats / std::f64::consts::LN_10,
        }
    }

    fn name(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mutual information between two order statistics or two groups of them.
    Mi(MiArgs),
    /// KL divergence between a joint order-statistic law and its marginals.
    Kl(KlArgs),
    /// Large-n limit of the scaled mutual information.
    Limit(LimitArgs),
    /// Mutual information for a discrete sampling law.
    Discrete(DiscreteArgs),
    /// Emit figure data as CSV.
    Figure(FigureArgs),
    /// Run a verification suite against the independent oracles.
    Verify(verify::VerifyArgs),
}

#[derive(Args)]
struct MiArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, requires = "m", conflicts_with = "subsets")]
    r: Option<u64>,
    #[arg(long, requires = "r")]
    m: Option<u64>,
    /// Two comma-separated index lists, e.g. `--subsets 1,2 3,4`.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    subsets: Option<Vec<String>>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "which")]
struct KlWhich {
    /// Comma-separated index list.
    #[arg(long, group = "which")]
    subset: Option<String>,
    /// All n order statistics.
    #[arg(long, group = "which")]
    whole: bool,
    /// The pair (1, n).
    #[arg(long, group = "which")]
    minmax: bool,
}

#[derive(Args)]
struct KlArgs {
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    which: KlWhich,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum CaseName {
    RVsMax,
    RVsM,
    KStep,
    QuantilePair,
    QuantileVsMax,
    MinVsMax,
    MedianVsMax,
    Q1VsMax,
    Q3VsMax,
    #[value(name = "1-step")]
    OneStep,
}

#[derive(Args, Clone)]
pub struct CaseArgs {
    #[arg(long, value_enum)]
    case: Option<CaseName>,
    #[arg(long)]
    r: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
}

impl CaseArgs {
    pub fn build(&self) -> Result<AsymptoticCase, CliError> {
        let name = self
            .case
            .ok_or_else(|| CliError::Domain("--case is required".into()))?;
        self.build_as(name)
    }

    fn build_as(&self, name: CaseName) -> Result<AsymptoticCase, CliError> {
        fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
            v.ok_or_else(|| CliError::Domain(format!("this case requires --{flag}")))
        }
        let case = match name {
            CaseName::RVsMax => AsymptoticCase::r_vs_max(need(self.r, "r")?),
            CaseName::RVsM => AsymptoticCase::r_vs_m(need(self.r, "r")?, need(self.m, "m")?),
            CaseName::KStep => AsymptoticCase::k_step(need(self.k, "k")?),
            CaseName::QuantilePair => {
                AsymptoticCase::quantile_pair(need(self.alpha, "alpha")?, need(self.beta, "beta")?)
            }
            CaseName::QuantileVsMax => AsymptoticCase::quantile_vs_max(need(self.alpha, "alpha")?),
            CaseName::MinVsMax => AsymptoticCase::r_vs_max(1),
            CaseName::MedianVsMax => AsymptoticCase::quantile_vs_max(0.5),
            CaseName::Q1VsMax => AsymptoticCase::quantile_vs_max(0.25),
            CaseName::Q3VsMax => AsymptoticCase::quantile_vs_max(0.75),
            CaseName::OneStep => AsymptoticCase::k_step(1),
        };
        Ok(case?)
    }
}

#[derive(Args)]
struct LimitArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// n values: `a..b` (inclusive) or a comma list.
    #[arg(long)]
    sweep: Option<String>,
    /// Write the sweep CSV here instead of stdout.
    #[arg(long, requires = "sweep")]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "law")]
struct Law {
    /// Bernoulli success probability.
    #[arg(long, group = "law")]
    bernoulli: Option<f64>,
    /// JSON file `{"support": [...], "probs": [...]}`.
    #[arg(long, group = "law")]
    dist: Option<PathBuf>,
}

#[derive(Args)]
struct DiscreteArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    r: u64,
    #[arg(long)]
    m: u64,
    #[command(flatten)]
    law: Law,
    /// Also compare against the continuous value for the same indices.
    #[arg(long)]
    check_bound: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureName {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_enum)]
    figure: FigureName,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bernoulli parameter for fig3.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Sample sizes for fig2, comma-separated.
    #[arg(long, default_value = "2,5,10")]
    sizes: String,
}

#[derive(Debug)]
pub enum CliError {
    Verification(String),
    Domain(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Verification(s) | CliError::Domain(s) | CliError::Io(s) => f.write_str(s),
        }
    }
}

impl From<ordstat::Error> for CliError {
    fn from(e: ordstat::Error) -> Self {
        match e {
            ordstat::Error::Consistency(_) => CliError::Verification(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

pub fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.code());
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ORDSTAT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        CliError::Domain(format!(
            "ORDSTAT_THREADS must be a non-negative integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Domain(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Mi(a) => cmd_mi(cli, a),
        Command::Kl(a) => cmd_kl(cli, a),
        Command::Limit(a) => cmd_limit(cli, a),
        Command::Discrete(a) => cmd_discrete(cli, a),
        Command::Figure(a) => cmd_figure(a),
        Command::Verify(a) => verify::run(a, |x| cli.log_base.scale(x)),
    }
}

fn emit(cli: &Cli, rec: OutputRecord, value: f64) -> Result<(), CliError> {
    let rec = rec.extra("log_base", cli.log_base.name());
    let text = if cli.json {
        serde_json::to_string_pretty(&rec).expect("record serializes")
    } else {
        g15(value)
    };
    write_stdout(&format!("{text}\n"))
}

fn write_stdout(s: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    out.write_all(s.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

pub fn write_output(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| io_err(path, e)),
        None => write_stdout(body),
    }
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<u64>().map_err(|_| {
                CliError::Domain(format!("{what}: {t:?} is not a non-negative integer"))
            })
        })
        .collect()
}

fn parse_index_set(n: u64, s: &str) -> Result<IndexSet, CliError> {
    Ok(IndexSet::from_unsorted(n, parse_list(s, "index list")?)?)
}

fn parse_sweep(s: &str) -> Result<Vec<u64>, CliError> {
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let lo: u64 = a
            .trim()
            .parse()
            .map_err(|_| CliError::Domain(format!("sweep start {a:?} is not an integer")))?;
        let hi: u64 = b
            .trim()
            .parse()
            .map_err(|_| CliError::Domain(format!("sweep end {b:?} is not an integer")))?;
        if lo > hi {
            return Err(CliError::Domain(format!("sweep range {lo}..{hi} is empty")));
        }
        Ok((lo..=hi).collect())
    } else {
        parse_list(s, "sweep")
    }
}

fn cmd_mi(cli: &Cli, a: &MiArgs) -> Result<(), CliError> {
    let (res, rec) = match (&a.subsets, a.r, a.m) {
        (Some(lists), _, _) => {
            let sa = parse_index_set(a.n, &lists[0])?;
            let sb = parse_index_set(a.n, &lists[1])?;
            let res = mi_subsets(a.n, &sa, &sb)?;
            let rec = |v, m: &str| {
                OutputRecord::new("mi", v, m)
                    .param("n", a.n)
                    .param("a", json!(sa.indices()))
                    .param("b", json!(sb.indices()))
            };
            (
                res.clone(),
                rec(
                    cli.log_base.scale(res.value.to_f64()),
                    &res.method.to_string(),
                ),
            )
        }
        (None, Some(r), Some(m)) => {
            let res = mi_pair(a.n, r, m)?;
            let v = cli.log_base.scale(res.value.to_f64());
            let rec = OutputRecord::new("mi", v, &res.method.to_string())
                .param("n", a.n)
                .param("r", r)
                .param("m", m);
            (res, rec)
        }
        _ => {
            return Err(CliError::Domain(
                "mi needs --r and --m, or --subsets A B".into(),
            ))
        }
    };
    let rec = match &res.diagnostics {
        Some(d) => rec.extra("diagnostics", d.as_str()),
        None => rec,
    };
    emit(cli, rec, cli.log_base.scale(res.value.to_f64()))
}

fn cmd_kl(cli: &Cli, a: &KlArgs) -> Result<(), CliError> {
    let n = a.n;
    let (value, shape, general) = if let Some(s) = &a.which.subset {
        let idx = parse_index_set(n, s)?;
        let v = kl_subset(&idx);
        (v, json!(idx.indices()), v)
    } else if a.which.whole {
        let v = kl_whole_sequence(n)?;
        (v, json!("whole"), kl_subset(&IndexSet::full(n)?))
    } else {
        let v = kl_min_max(n)?;
        let idx = IndexSet::new(n, if n == 1 { vec![1] } else { vec![1, n] })?;
        (v, json!("minmax"), kl_subset(&idx))
    };
    if (value - general).abs() > 1e-10 * value.abs().max(1.0) {
        return Err(CliError::Verification(format!(
            "shortcut {value} disagrees with the general subset path {general}"
        )));
    }
    let v = cli.log_base.scale(value);
    let rec = OutputRecord::new("kl", v, "closed-form")
        .param("n", n)
        .param("subset", shape)
        .extra("general_path", json_num(cli.log_base.scale(general)));
    emit(cli, rec, v)
}

fn cmd_limit(cli: &Cli, a: &LimitArgs) -> Result<(), CliError> {
    let case = a.case.build()?;
    match &a.sweep {
        None => {
            let v = cli.log_base.scale(case.limit()?);
            let rate = decoupling_rate(&case);
            let rec = OutputRecord::new("limit", v, "limit")
                .param("case", case.case_id())
                .param("spec", serde_json::to_value(case).expect("case serializes"))
                .extra("scale", format!("{:?}", case.scale()))
                .extra("mi_rate", rate.mi.to_string())
                .extra("covariance_rate", rate.covariance.to_string());
            emit(cli, rec, v)
        }
        Some(s) => {
            let ns = parse_sweep(s)?;
            let rows = convergence_table(&case, &ns)?;
            let body = if cli.json {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        json!({
                            "n": r.n, "r": r.r, "m": r.m,
                            "scaled_exact": json_num(cli.log_base.scale(r.scaled_exact)),
                            "limit": json_num(cli.log_base.scale(r.limit)),
                            "gap": json_num(cli.log_base.scale(r.gap)),
                        })
                    })
                    .collect();
                let rec = json!({
                    "command": "limit",
                    "parameters": {"case": case.case_id(), "sweep": s},
                    "method": "closed-form",
                    "log_base": cli.log_base.name(),
                    "rows": rows,
                });
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&rec).expect("serializes")
                )
            } else {
                let mut w = figures::csv_writer();
                w.write_record(["n", "scaled_exact", "limit", "gap"])
                    .expect("in-memory write");
                for r in &rows {
                    w.write_record([
                        r.n.to_string(),
                        g15(cli.log_base.scale(r.scaled_exact)),
                        g15(cli.log_base.scale(r.limit)),
                        g15(cli.log_base.scale(r.gap)),
                    ])
                    .expect("in-memory write");
                }
                figures::finish(w)
            };
            write_output(a.out.as_deref(), &body)
        }
    }
}

fn load_dist(path: &Path) -> Result<DiscreteDist, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Domain(format!("{}: invalid distribution: {e}", path.display())))
}

fn cmd_discrete(cli: &Cli, a: &DiscreteArgs) -> Result<(), CliError> {
    let (n, r, m) = (a.n, a.r, a.m);
    let (dist, value, law) = match (a.law.bernoulli, &a.law.dist) {
        (Some(p), _) => {
            let v = mi_bernoulli(n, p, r, m)?;
            (DiscreteDist::bernoulli(p)?, v, json!({"bernoulli": p}))
        }
        (None, Some(path)) => {
            let d = load_dist(path)?;
            let v = mi_discrete_exact(n, &d, r, m)?;
            let law = json!({"support": d.support(), "probs": d.probs()});
            (d, v, law)
        }
        _ => unreachable!("clap enforces one law"),
    };
    let v = cli.log_base.scale(value);
    let mut rec = OutputRecord::new("discrete", v, "closed-form")
        .param("n", n)
        .param("r", r)
        .param("m", m)
        .param("law", law);
    let mut text = g15(v);
    if a.check_bound {
        let b = check_upper_bound(n, &dist, r, m)?;
        let cont = cli.log_base.scale(b.continuous);
        let margin = cli.log_base.scale(b.margin);
        rec = rec
            .extra("continuous", json_num(cont))
            .extra("margin", json_num(margin))
            .extra("holds", b.holds);
        text = format!(
            "{text}\ncontinuous {}\nmargin {}\nholds {}",
            g15(cont),
            g15(margin),
            b.holds
        );
    }
    let rec = rec.extra("log_base", cli.log_base.name());
    if cli.json {
        write_stdout(&format!(
            "{}\n",
            serde_json::to_string_pretty(&rec).expect("serializes")
        ))
    } else {
        write_stdout(&format!("{text}\n"))
    }
}

fn cmd_figure(a: &FigureArgs) -> Result<(), CliError> {
    let body = match a.figure {
        FigureName::Fig1 => figures::fig1()?,
        FigureName::Fig2 => figures::fig2(&parse_list(&a.sizes, "sizes")?)?,
        FigureName::Fig3 => figures::fig3(a.p)?,
    };
    write_output(a.out.as_deref(), &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_forms() {
        assert_eq!(parse_sweep("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_sweep("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_sweep("10,20").unwrap(), vec![10, 20]);
        assert!(parse_sweep("5..2").is_err());
        assert!(parse_sweep("a..2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
