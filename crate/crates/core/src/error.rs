//! Error type shared across the crate.

use crate::tw::TwLocationScale;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Input failed a structural precondition (dimensions, labels, parameter
    /// ranges, non-finite values, rank requirements).
    #[error("validation error: {0}")]
    Validation(String),

    /// The problem is structurally valid but numerically degenerate
    /// (e.g. rank-zero A+B, zero-variance fitting sample).
    #[error("degenerate problem: {0}")]
    Degenerate(String),

    /// More than 20% of the permutation roots landed on the clipping
    /// boundary, so the fitted null would be meaningless.
    #[error(
        "degenerate null: {clipped} of {total} permutation roots were clipped \
         at a numerical boundary; inspect the problem rank and --rank-tol"
    )]
    DegenerateNull { clipped: usize, total: usize },

    /// An optimizer-based fit did not converge. The method-of-moments
    /// estimate it was started from is carried along.
    #[error(
        "{method} fit did not converge within {iterations} iterations; \
         method-of-moments fallback: mu={:.6}, sigma={:.6}",
        fallback.mu,
        fallback.sigma
    )]
    FitFailure {
        method: &'static str,
        iterations: usize,
        fallback: Box<TwLocationScale>,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
