use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration (ranges, counts, unknown keys).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain of a numerical operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Gram matrix of the zero-forcing problem is (numerically) rank deficient.
    #[error("singular channel Gram matrix (condition number {condition:.3e}); offending users {users:?}")]
    Singular { condition: f64, users: Vec<usize> },

    /// A correlation matrix had eigenvalues too negative to be explained by round-off.
    #[error("correlation matrix is not positive semidefinite: min eigenvalue {min:.3e}, max eigenvalue {max:.3e}")]
    NotPsd { min: f64, max: f64 },

    #[error("adaptive quadrature on [{lo}, {hi}] did not converge: error estimate {error_estimate:.3e} after {evaluations} integrand evaluations")]
    Quadrature {
        lo: f64,
        hi: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io { .. } | Error::Csv { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
