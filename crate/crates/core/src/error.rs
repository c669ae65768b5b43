use thiserror::Error;

/// Errors surfaced by the analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// An iterative evaluation failed to converge within its iteration budget.
    #[error("{func} did not converge within {iters} iterations")]
    NoConvergence { func: &'static str, iters: usize },

    /// A truncated series cannot deliver the requested accuracy for these
    /// arguments (terms grow before they decay, or floating-point
    /// cancellation dominates the sum).
    #[error("series evaluation not admissible: {0}")]
    SeriesInadmissible(String),

    /// A configuration value violates a model invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A linear subproblem has no solution inside its box.
    #[error("infeasible subproblem: {0}")]
    Infeasible(String),

    /// Moment arithmetic produced a degenerate (non-positive) variance.
    #[error("degenerate moments: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
