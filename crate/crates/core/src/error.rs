use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition. The message names
    /// the violated constraint.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge within {evaluations} evaluations \
         (best estimate {estimate}, error estimate {error_estimate:e})"
    )]
    QuadratureNonConvergence {
        estimate: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error(
        "exhaustive enumeration needs {outcomes} outcomes but the budget is {budget}; \
         use the Monte-Carlo estimator instead"
    )]
    EnumerationBudget { outcomes: u128, budget: u64 },

    /// A computed quantity broke an invariant beyond numerical slack.
    #[error("internal consistency violated: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
