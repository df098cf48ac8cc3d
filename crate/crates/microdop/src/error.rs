//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the processing chain.
#[derive(Debug, Error)]
pub enum Error {
    /// Mismatched or otherwise invalid dimensions.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A matrix that was required to be Hermitian is not.
    #[error("matrix is not Hermitian: relative asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    /// A linear system is singular (or numerically so) even after loading.
    #[error("singular system: condition estimate {condition:.3e}")]
    Singular { condition: f64 },

    /// Non-finite (NaN/Inf) value where a finite one is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A scene parameter falls outside the unambiguous Doppler span.
    #[error(
        "doppler {doppler:.3} rad/s outside unambiguous span ±{span:.3} rad/s (target {target})"
    )]
    Aliased {
        doppler: f64,
        span: f64,
        target: usize,
    },

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    Config(String),

    /// Power-match clutter selection could not pick an eigenvector.
    #[error(
        "clutter power-match ambiguous: estimate {estimate:.3e}, no eigenvalue within \
         {threshold_db} dB; candidates (eigenvalue, dc fraction): {candidates:?}"
    )]
    PowerMatchAmbiguous {
        estimate: f64,
        threshold_db: f64,
        candidates: Vec<(f64, f64)>,
    },

    /// Requested operation is not supported for the given input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Scenario / pipeline file I/O.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Scenario / pipeline file parse error.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
