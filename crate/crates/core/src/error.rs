//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cholesky factorization hit a non-positive pivot; the matrix is not
    /// positive definite (or is singular to working precision).
    #[error("matrix not positive definite: pivot {pivot} failed")]
    SingularMatrix { pivot: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A channel row with zero norm cannot be normalized or matched.
    #[error("channel row for user {user} has zero norm")]
    ZeroNormRow { user: usize },

    /// Zero-forcing needs strictly more antennas than users.
    #[error("precoder infeasible: {antennas} antennas for {users} users")]
    NotEnoughAntennas { antennas: usize, users: usize },

    /// No antenna count satisfies the requested operating point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    /// Numerical failure inside a Monte Carlo realization.
    #[error("realization {index}: {source}")]
    Realization {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
