use ordstat::continuous::{IndexSet, LogMoment};
use ordstat::discrete::{mi_bernoulli, DiscreteDist};
use ordstat::oracles::{
    enum_mi_discrete, mc_covariance, mc_mi_discrete, quad_beta_log_expectation, quad_kl_subset,
    quad_mi_pair, quad_mi_subsets, simplex_mass, CovarianceFamily, OracleKind, RngSpec,
    DEFAULT_ENUM_BUDGET,
};
use ordstat::Error;

fn three_point() -> DiscreteDist {
    DiscreteDist::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap()
}

#[test]
fn quadrature_reproduces_every_pair_up_to_eight() {
    for n in 2..=8 {
        for r in 1..n {
            for m in r + 1..=n {
                let rep = quad_mi_pair(n, r, m, 1e-9).unwrap();
                assert_eq!(rep.oracle_kind, OracleKind::Quadrature);
                assert!(rep.abs_diff < 1e-6, "({n},{r},{m}): {rep:?}");
            }
        }
    }
}

#[test]
fn quadrature_reaches_twelve() {
    let rep = quad_mi_pair(12, 1, 12, 1e-9).unwrap();
    assert!(rep.abs_diff < 1e-6, "{rep:?}");
    let rep = quad_mi_pair(12, 6, 7, 1e-9).unwrap();
    assert!(rep.abs_diff < 1e-6, "{rep:?}");
}

#[test]
fn quadrature_kl_of_subsets() {
    for ix in [
        vec![1, 2],
        vec![1, 5],
        vec![2, 3, 6],
        vec![1, 2, 3, 4, 5, 6],
    ] {
        let idx = IndexSet::new(6, ix).unwrap();
        let rep = quad_kl_subset(&idx, 1e-11).unwrap();
        assert!(rep.abs_diff < 1e-8, "{idx}: {rep:?}");
    }
    let a = IndexSet::new(4, vec![1, 2]).unwrap();
    let b = IndexSet::new(4, vec![3, 4]).unwrap();
    let rep = quad_mi_subsets(4, &a, &b, 1e-11).unwrap();
    assert!((rep.oracle - 0.541573864105278).abs() < 1e-8);
}

#[test]
fn beta_log_moments_against_digamma() {
    for n in 1..=10 {
        for m in 1..=n {
            for kind in [LogMoment::LogU, LogMoment::LogOneMinusU] {
                let rep = quad_beta_log_expectation(n, m, kind, 1e-11).unwrap();
                assert!(rep.abs_diff < 1e-9, "{n} {m} {kind:?}");
            }
        }
    }
}

#[test]
fn densities_integrate_to_one() {
    for ix in [vec![3], vec![1, 6], vec![2, 3], vec![1, 3, 6]] {
        let idx = IndexSet::new(6, ix).unwrap();
        let (mass, evals) = simplex_mass(&idx, 1e-10).unwrap();
        assert!((mass - 1.0).abs() < 1e-8, "{idx}: {mass}");
        assert!(evals > 0);
    }
}

#[test]
fn enumeration_budget_error_names_the_fallback() {
    let err = enum_mi_discrete(15, &three_point(), 1, 2, DEFAULT_ENUM_BUDGET).unwrap_err();
    assert!(matches!(err, Error::EnumerationBudget { .. }));
    assert!(err.to_string().contains("Monte-Carlo"));
}

#[test]
fn plug_in_bernoulli_fixture() {
    let d = DiscreteDist::bernoulli(0.5).unwrap();
    let rep = mc_mi_discrete(10, &d, 9, 10, 1_000_000, RngSpec::default()).unwrap();
    assert!((rep.closed_form - 0.00447264286570748).abs() < 1e-12);
    let z = (rep.oracle - 0.00447264286570748).abs() / rep.std_error.unwrap();
    assert!(z < 4.0, "{rep:?}");
    assert_eq!(rep.seed, Some(42));
}

#[test]
fn plug_in_three_point_law() {
    let d = three_point();
    let exact = enum_mi_discrete(5, &d, 2, 4, DEFAULT_ENUM_BUDGET)
        .unwrap()
        .oracle;
    let rep = mc_mi_discrete(5, &d, 2, 4, 1_000_000, RngSpec::new(9, 16).unwrap()).unwrap();
    assert!(
        (rep.oracle - exact).abs() < 4.0 * rep.std_error.unwrap(),
        "{rep:?}"
    );
}

#[test]
fn bootstrap_error_shrinks_like_root_n() {
    let d = DiscreteDist::bernoulli(0.5).unwrap();
    let spec = RngSpec::default();
    let a = mc_mi_discrete(10, &d, 9, 10, 1_000_000, spec).unwrap();
    let b = mc_mi_discrete(10, &d, 9, 10, 2_000_000, spec).unwrap();
    let ratio = a.std_error.unwrap() / b.std_error.unwrap();
    assert!((1.25..=1.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let d = DiscreteDist::bernoulli(0.3).unwrap();
    let spec = RngSpec::new(5, 8).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let mi = mc_mi_discrete(7, &d, 2, 6, 50_000, spec).unwrap();
            let cov = mc_covariance(CovarianceFamily::Uniform, 6, 2, 5, 50_000, spec).unwrap();
            (mi, cov)
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn covariance_estimates_at_moderate_size() {
    let spec = RngSpec::default();
    let rep = mc_covariance(CovarianceFamily::Uniform, 3, 1, 3, 1_000_000, spec).unwrap();
    assert!(rep.z_score().unwrap() < 4.0, "{rep:?}");
    assert_eq!(rep.closed_form, 1.0 / 80.0);
    let exp = CovarianceFamily::Exponential { lambda: 2.0 };
    let rep = mc_covariance(exp, 10, 1, 2, 1_000_000, spec).unwrap();
    assert!(rep.z_score().unwrap() < 4.0, "{rep:?}");
    assert_eq!(rep.closed_form, 1.0 / 400.0);
}

#[test]
fn enumeration_matches_bernoulli_formula_on_tails() {
    let d = DiscreteDist::bernoulli(0.5).unwrap();
    let rep = enum_mi_discrete(12, &d, 11, 12, DEFAULT_ENUM_BUDGET).unwrap();
    assert!((rep.oracle - mi_bernoulli(12, 0.5, 11, 12).unwrap()).abs() < 1e-12);
}
