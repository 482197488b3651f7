use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No dyadic bandwidth falls inside `[h_star, h_upper]`.
    #[error(
        "degenerate bandwidth grid: no bandwidth 2^-k lies in [h_star, h_upper] = [{h_star:.6}, {h_upper:.6}] for n = {n}, q = {q}"
    )]
    DegenerateGrid {
        n: usize,
        q: f64,
        h_star: f64,
        h_upper: f64,
    },

    /// Adaptive quadrature hit its recursion limit before reaching tolerance.
    #[error(
        "quadrature did not converge on [{a}, {b}]: estimated error {error_estimate:e} exceeds tolerance {tolerance:e} at depth {depth}"
    )]
    Quadrature {
        a: f64,
        b: f64,
        tolerance: f64,
        error_estimate: f64,
        depth: usize,
    },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
