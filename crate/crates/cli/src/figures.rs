//! Figure data as CSV text.

use ordstat::asymptotics::{convergence_table, AsymptoticCase};
use ordstat::continuous::mi_pair;
use ordstat::discrete::{mi_bernoulli, mi_min_max_bernoulli};
use rayon::prelude::*;

use crate::format::g15;
use crate::CliError;

pub const FIG1_HEADER: [&str; 3] = ["n", "n_times_mi", "limit"];
pub const FIG2_HEADER: [&str; 3] = ["p", "n", "mi_min_max"];
pub const FIG3_HEADER: [&str; 3] = ["n", "mi_bernoulli_p05_step1", "mi_uniform_step1"];

pub fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn table(header: [&str; 3], rows: Vec<[String; 3]>) -> String {
    let mut w = csv_writer();
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

pub fn fig1() -> Result<String, CliError> {
    let case = AsymptoticCase::quantile_vs_max(0.5)?;
    let ns: Vec<u64> = (2..=100).collect();
    let rows = convergence_table(&case, &ns)?
        .into_iter()
        .map(|r| [r.n.to_string(), g15(r.scaled_exact), g15(r.limit)])
        .collect();
    Ok(table(FIG1_HEADER, rows))
}

/// The p grid used by fig2: 0.01, 0.02, ..., 0.99.
pub fn fig2_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

pub fn fig2(sizes: &[u64]) -> Result<String, CliError> {
    let grid = fig2_grid();
    let mut rows = Vec::with_capacity(grid.len() * sizes.len());
    for &n in sizes {
        let vals = grid
            .par_iter()
            .map(|&p| mi_min_max_bernoulli(n, p))
            .collect::<ordstat::Result<Vec<f64>>>()?;
        for (p, v) in grid.iter().zip(vals) {
            rows.push([g15(*p), n.to_string(), g15(v)]);
        }
    }
    Ok(table(FIG2_HEADER, rows))
}

/// Row of fig3 for one n. A single draw has no neighbouring pair and is
/// plotted as 0.
pub fn fig3_row(n: u64, p: f64) -> Result<(f64, f64), CliError> {
    if n < 2 {
        return Ok((0.0, 0.0));
    }
    Ok((
        mi_bernoulli(n, p, n - 1, n)?,
        mi_pair(n, n - 1, n)?.value.to_f64(),
    ))
}

pub fn fig3(p: f64) -> Result<String, CliError> {
    // validate p once even though n = 1 never touches it
    ordstat::discrete::DiscreteDist::bernoulli(p)?;
    let rows = (1..=50u64)
        .into_par_iter()
        .map(|n| {
            let (b, u) = fig3_row(n, p)?;
            Ok([n.to_string(), g15(b), g15(u)])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(table(FIG3_HEADER, rows))
}
