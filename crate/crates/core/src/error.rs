use std::io;

use thiserror::Error;

/// Everything that can go wrong in the toolkit.
///
/// The variants line up with the command-line exit-code contract: see
/// [`Error::is_config`], [`Error::is_stability`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("numerical stability error at t = {t}: {reason} (try dt <= {suggested_dt:e})")]
    Stability {
        t: f64,
        reason: String,
        suggested_dt: f64,
    },
    #[error("numerical consistency error: {0}")]
    Consistency(String),
    #[error("quadrature accuracy error: {0}")]
    Accuracy(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Format(_))
    }

    pub fn is_stability(&self) -> bool {
        matches!(
            self,
            Error::Stability { .. } | Error::Consistency(_) | Error::Divergence(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
