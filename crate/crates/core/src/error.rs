use thiserror::Error;

/// Errors raised by the recovery library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters (refinement level, sensor count, tolerances, dimensions).
    #[error("configuration error: {0}")]
    Config(String),

    /// A point outside the closed unit square.
    #[error("point ({x}, {y}) lies outside the closed unit square")]
    Domain { x: f64, y: f64 },

    /// An iterative solve stopped before reaching its residual target.
    #[error("{method} did not converge: relative residual {achieved:.3e} after {iterations} iterations (target {target:.3e})")]
    Solver {
        method: &'static str,
        achieved: f64,
        target: f64,
        iterations: usize,
    },

    /// A pivot vanished to working precision in a dense factorization.
    #[error("matrix is singular to working precision (pivot {pivot:.3e} at column {column})")]
    Singular { column: usize, pivot: f64 },

    /// Representer computation failed for one functional of a sensor set.
    #[error("representer {index} failed: {source}")]
    Representer {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// The online Gramian solve failed.
    #[error("recovery failed: {reason} (gramian condition {condition:.3e})")]
    Recovery { reason: String, condition: f64 },

    /// Malformed bundle file.
    #[error("bundle format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
