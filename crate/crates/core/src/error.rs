use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular (zero pivot at column {column})")]
    Singular { column: usize },

    #[error("matrix is ill-conditioned: condition estimate {condition:.3e} exceeds {threshold:.1e}")]
    IllConditioned { condition: f64, threshold: f64 },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("profile spectrum vanishes at k = {k:.6} (non-invertible beam profile)")]
    NonInvertibleSpectrum { k: f64 },

    #[error("zero amplitude at index {index} inside the fit range")]
    ZeroAmplitude { index: usize },

    #[error(
        "transverse mode {mode} is unstable (eigenvalue {eigenvalue:.4e}); anisotropy {anisotropy} is too small for a linear chain"
    )]
    ZigzagInstability {
        mode: usize,
        eigenvalue: f64,
        anisotropy: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::DimensionMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
