use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ordstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordstat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ordstat_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordstat"))
        .args(args)
        .env(key, val)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = ordstat(args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn value(args: &[&str]) -> f64 {
    ok(args).trim().parse().unwrap()
}

fn code(args: &[&str]) -> i32 {
    ordstat(args).status.code().unwrap()
}

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn parse_csv(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn mi_examples() {
    assert_eq!(
        ok(&["mi", "--n", "2", "--r", "1", "--m", "2"]),
        "0.306852819440055\n"
    );
    assert_eq!(ok(&["mi", "--n", "5", "--r", "3", "--m", "3"]), "inf\n");
    let v = value(&["mi", "--n", "4", "--subsets", "1,2", "3,4"]);
    assert!(close(v, 0.541573864105278, 1e-12));
    // unsorted lists are accepted
    assert_eq!(v, value(&["mi", "--n", "4", "--subsets", "2,1", "4,3"]));
}

#[test]
fn kl_examples() {
    let v = value(&["kl", "--n", "10", "--minmax"]);
    assert!(close(v, (0.9f64).ln() + 1.0 / 9.0, 1e-12));
    let v = value(&["kl", "--n", "3", "--whole"]);
    assert!(close(v, 3.0 - 2.0 * 3f64.ln(), 1e-12));
    assert_eq!(value(&["kl", "--n", "7", "--subset", "4"]), 0.0);
    let general = value(&["kl", "--n", "10", "--subset", "1,10"]);
    assert!(close(
        value(&["kl", "--n", "10", "--minmax"]),
        general,
        1e-12
    ));
}

#[test]
fn limit_examples() {
    assert_eq!(
        value(&["limit", "--case", "quantile-vs-max", "--alpha", "0.5"]),
        0.5
    );
    assert!((value(&["limit", "--case", "k-step", "--k", "1"]) - 0.5772156649).abs() < 1e-10);
    assert_eq!(
        value(&["limit", "--case", "1-step"]),
        value(&["limit", "--case", "k-step", "--k", "1"])
    );
    assert_eq!(value(&["limit", "--case", "min-vs-max"]), 0.5);
    let csv = ok(&["limit", "--case", "median-vs-max", "--sweep", "2..100"]);
    let (header, rows) = parse_csv(&csv);
    assert_eq!(header, "n,scaled_exact,limit,gap");
    assert_eq!(rows.len(), 99);
    assert_eq!(rows[0][..2], [2.0, 0.613705638880109]);
}

#[test]
fn discrete_examples() {
    let args = [
        "discrete",
        "--n",
        "2",
        "--r",
        "1",
        "--m",
        "2",
        "--bernoulli",
        "0.5",
    ];
    assert_eq!(ok(&args), "0.0849495183976987\n");
    let out = ok(&[
        "--json",
        "discrete",
        "--n",
        "10",
        "--r",
        "9",
        "--m",
        "10",
        "--bernoulli",
        "0.5",
        "--check-bound",
    ]);
    let rec: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(rec["holds"], Value::Bool(true));
    assert!(rec["margin"].as_f64().unwrap() > 0.0);
    assert_eq!(rec["command"], "discrete");

    let dir = tempfile::tempdir().unwrap();
    let tri = dir.path().join("tri.json");
    fs::write(&tri, r#"{"support":[0,1,2],"probs":[0.2,0.3,0.5]}"#).unwrap();
    let v = value(&[
        "discrete",
        "--n",
        "5",
        "--r",
        "2",
        "--m",
        "4",
        "--dist",
        tri.to_str().unwrap(),
    ]);
    let law =
        ordstat::discrete::DiscreteDist::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
    let want = ordstat::oracles::enum_mi_discrete(5, &law, 2, 4, 10_000_000)
        .unwrap()
        .oracle;
    assert!((v - want).abs() < 1e-12);
}

#[test]
fn json_records_carry_inf_as_a_token() {
    let rec: Value =
        serde_json::from_str(&ok(&["--json", "mi", "--n", "5", "--r", "3", "--m", "3"])).unwrap();
    assert_eq!(rec["value"], "inf");
    assert_eq!(rec["parameters"]["n"], 5);
    let rec: Value =
        serde_json::from_str(&ok(&["--json", "mi", "--n", "2", "--r", "1", "--m", "2"])).unwrap();
    assert_eq!(rec["method"], "closed-form");
    assert_eq!(rec["value"].as_f64().unwrap(), 0.3068528194400547);
}

#[test]
fn log_base_rescales() {
    let nats = value(&["mi", "--n", "6", "--r", "2", "--m", "5"]);
    let bits = value(&["--log-base", "2", "mi", "--n", "6", "--r", "2", "--m", "5"]);
    let dits = value(&["mi", "--n", "6", "--r", "2", "--m", "5", "--log-base", "10"]);
    assert!(close(bits, nats / 2f64.ln(), 1e-13));
    assert!(close(dits, nats / 10f64.ln(), 1e-13));
    assert_eq!(
        code(&["--log-base", "3", "mi", "--n", "2", "--r", "1", "--m", "2"]),
        2
    );
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["mi", "--n", "3", "--r", "0", "--m", "2"]), 2);
    assert_eq!(code(&["mi", "--n", "3", "--r", "1", "--m", "4"]), 2);
    assert_eq!(code(&["mi", "--n", "3"]), 2);
    assert_eq!(code(&["kl", "--n", "3", "--subset", "1,1"]), 2);
    assert_eq!(
        code(&[
            "limit",
            "--case",
            "quantile-pair",
            "--alpha",
            "0.6",
            "--beta",
            "0.4"
        ]),
        2
    );
    assert_eq!(code(&["limit", "--case", "r-vs-max"]), 2);
    assert_eq!(
        code(&[
            "discrete",
            "--n",
            "3",
            "--r",
            "2",
            "--m",
            "2",
            "--bernoulli",
            "0.5"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "discrete",
            "--n",
            "3",
            "--r",
            "1",
            "--m",
            "2",
            "--bernoulli",
            "1.5"
        ]),
        2
    );
    assert_eq!(code(&["verify", "nonsense"]), 2);
    assert_eq!(
        code(&["figure", "fig1", "--out", "/nonexistent-dir/fig1.csv"]),
        3
    );
    assert_eq!(
        code(&["verify", "csv", "--input", "/nonexistent-dir/x.csv"]),
        3
    );
}

#[test]
fn malformed_distribution_files() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("garbage.json", "not json"),
        ("short.json", r#"{"support":[1,2],"probs":[0.5]}"#),
        ("unsorted.json", r#"{"support":[2,1],"probs":[0.5,0.5]}"#),
        ("missing.json", r#"{"support":[1,2]}"#),
    ];
    for (name, body) in cases {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        let o = ordstat(&[
            "discrete",
            "--n",
            "3",
            "--r",
            "1",
            "--m",
            "2",
            "--dist",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(name));
    }
    let gone = dir.path().join("absent.json");
    assert_eq!(
        code(&[
            "discrete",
            "--n",
            "3",
            "--r",
            "1",
            "--m",
            "2",
            "--dist",
            gone.to_str().unwrap()
        ]),
        3
    );
}

#[test]
fn fig1_matches_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    assert_eq!(ok(&["figure", "fig1", "--out", out.to_str().unwrap()]), "");
    let text = fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    let (header, got) = parse_csv(&text);
    let (want_header, want) = parse_csv(&fs::read_to_string(fixture("fig1.csv")).unwrap());
    assert_eq!(header, want_header);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g[0], w[0]);
        assert!(close(g[1], w[1], 1e-9), "n = {}", g[0]);
        assert_eq!(g[2], 0.5);
    }
    assert_eq!(got.last().unwrap()[0], 100.0);
}

#[test]
fn fig3_matches_fixture() {
    let (header, got) = parse_csv(&ok(&["figure", "fig3"]));
    let (want_header, want) = parse_csv(&fs::read_to_string(fixture("fig3.csv")).unwrap());
    assert_eq!(header, want_header);
    assert_eq!(got.len(), 50);
    assert_eq!(got[0], vec![1.0, 0.0, 0.0]);
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g[0], w[0]);
        assert!(close(g[1], w[1], 1e-6), "bernoulli n = {}", g[0]);
        assert!(close(g[2], w[2], 1e-9), "uniform n = {}", g[0]);
    }
    assert!(close(got[49][2], 0.567182332901297, 1e-9));
}

#[test]
fn fig3_p_override_changes_only_the_bernoulli_column() {
    let (_, half) = parse_csv(&ok(&["figure", "fig3"]));
    let (_, other) = parse_csv(&ok(&["figure", "fig3", "--p", "0.3"]));
    for (a, b) in half.iter().zip(&other).skip(1) {
        assert_ne!(a[1], b[1]);
        assert_eq!(a[2], b[2]);
    }
}

#[test]
fn fig2_sweeps_p() {
    let (header, rows) = parse_csv(&ok(&["figure", "fig2", "--sizes", "3"]));
    assert_eq!(header, "p,n,mi_min_max");
    assert_eq!(rows.len(), 99);
    let mid = &rows[49];
    assert_eq!(mid[0], 0.5);
    let want = ordstat::discrete::mi_min_max_bernoulli(3, 0.5).unwrap();
    assert!(close(mid[2], want, 1e-13));
}

#[test]
fn emitted_csvs_round_trip_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    ok(&["figure", "fig1", "--out", &path("f1.csv")]);
    ok(&["figure", "fig2", "--out", &path("f2.csv")]);
    ok(&["figure", "fig3", "--out", &path("f3.csv")]);
    ok(&["figure", "fig3", "--p", "0.2", "--out", &path("f3b.csv")]);
    ok(&[
        "limit",
        "--case",
        "q1-vs-max",
        "--sweep",
        "4,8,16,32",
        "--out",
        &path("s.csv"),
    ]);
    ok(&[
        "verify",
        "quadrature",
        "--budget",
        "4",
        "--csv",
        &path("rep.csv"),
    ]);
    for f in ["f1.csv", "f2.csv", "f3.csv", "rep.csv"] {
        ok(&["verify", "csv", "--input", &path(f)]);
    }
    ok(&["verify", "csv", "--input", &path("f3b.csv"), "--p", "0.2"]);
    assert_eq!(code(&["verify", "csv", "--input", &path("f3b.csv")]), 1);
    ok(&[
        "verify",
        "csv",
        "--input",
        &path("s.csv"),
        "--case",
        "q1-vs-max",
    ]);
    assert_eq!(
        code(&[
            "verify",
            "csv",
            "--input",
            &path("s.csv"),
            "--case",
            "q3-vs-max"
        ]),
        1
    );
    assert_eq!(code(&["verify", "csv", "--input", &path("s.csv")]), 2);

    // a tampered value is caught
    let text = fs::read_to_string(path("f1.csv")).unwrap();
    fs::write(
        path("bad.csv"),
        text.replace("0.613705638880109", "0.613715638880109"),
    )
    .unwrap();
    assert_eq!(code(&["verify", "csv", "--input", &path("bad.csv")]), 1);
}

#[test]
fn verify_lemma1_quadrature_and_bound() {
    for suite in [["verify", "lemma1"], ["verify", "quadrature"]] {
        let rep: Value = serde_json::from_str(&ok(&suite)).unwrap();
        assert_eq!(rep["passed"], Value::Bool(true));
    }
    let rep: Value = serde_json::from_str(&ok(&["verify", "bound", "--seed", "42"])).unwrap();
    let checks = rep["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["passed"] == Value::Bool(true)));
    let laws: std::collections::BTreeSet<&str> = checks
        .iter()
        .map(|c| c["check"].as_str().unwrap().split(' ').next().unwrap())
        .collect();
    assert_eq!(laws.len(), 200);
}

#[test]
fn verify_reports_oracle_rows() {
    let rep: Value = serde_json::from_str(&ok(&["verify", "quadrature", "--budget", "5"])).unwrap();
    let checks = rep["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 20);
    for c in checks {
        let r = &c["report"];
        assert_eq!(r["oracle_kind"], "quadrature");
        assert!(r["abs_diff"].as_f64().unwrap() < 1e-6);
        assert!(r["effort"].as_u64().unwrap() > 0);
    }
}

#[test]
fn stochastic_suites_are_seeded_and_thread_independent() {
    let args = ["verify", "covariance", "--budget", "200000", "--seed", "7"];
    let one = ordstat_env(&args, "ORDSTAT_THREADS", "1");
    let four = ordstat_env(&args, "ORDSTAT_THREADS", "4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let rep: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(rep["checks"][0]["report"]["seed"], 7);
    let other = ordstat(&["verify", "covariance", "--budget", "200000", "--seed", "8"]);
    assert_ne!(one.stdout, other.stdout);
    assert_eq!(
        ordstat_env(&["figure", "fig3"], "ORDSTAT_THREADS", "0").stdout,
        ordstat(&["figure", "fig3"]).stdout
    );
    assert_eq!(
        ordstat_env(&["figure", "fig1"], "ORDSTAT_THREADS", "many")
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn enumeration_suite_passes() {
    let rep: Value = serde_json::from_str(&ok(&["verify", "enumeration"])).unwrap();
    assert_eq!(rep["passed"], Value::Bool(true));
    assert_eq!(code(&["verify", "enumeration", "--budget", "100"]), 2);
}
