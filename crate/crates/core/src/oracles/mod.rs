//! Independent numerical checks of the closed forms.
//!
//! None of these routes go through the `T` sequence: quadrature integrates
//! the densities directly, enumeration walks every outcome of a small
//! discrete sample, and the Monte-Carlo estimators sort simulated samples.

pub mod enumeration;
pub mod montecarlo;
pub mod quadrature;
pub mod random;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use enumeration::{enum_joint_pmf, enum_mi_bernoulli, enum_mi_discrete, DEFAULT_ENUM_BUDGET};
pub use montecarlo::{mc_covariance, mc_mi_discrete, CovarianceFamily, RngSpec};
pub use quadrature::{
    gauss_kronrod, quad_beta_log_expectation, quad_kl_subset, quad_mi_pair, quad_mi_subsets,
    simplex_mass, Quadrature,
};
pub use random::{random_cases, random_discrete_dist, RandomCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Quadrature,
    Enumeration,
    MonteCarlo,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Quadrature => "quadrature",
            OracleKind::Enumeration => "enumeration",
            OracleKind::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub oracle_kind: OracleKind,
    /// Function evaluations, outcomes or samples.
    pub effort: u64,
    pub seed: Option<u64>,
    /// Standard error of a stochastic oracle.
    pub std_error: Option<f64>,
}

impl OracleReport {
    pub fn new(closed_form: f64, oracle: f64, oracle_kind: OracleKind, effort: u64) -> Self {
        let abs_diff = (closed_form - oracle).abs();
        Self {
            closed_form,
            oracle,
            abs_diff,
            rel_diff: abs_diff / closed_form.abs().max(1e-300),
            oracle_kind,
            effort,
            seed: None,
            std_error: None,
        }
    }

    pub fn with_stochastic(mut self, seed: u64, std_error: f64) -> Self {
        self.seed = Some(seed);
        self.std_error = Some(std_error);
        self
    }

    /// `|closed − oracle|` in units of the standard error, if there is one.
    pub fn z_score(&self) -> Option<f64> {
        self.std_error.map(|se| self.abs_diff / se)
    }
}
