use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The dark port carries (numerically) no light: phi/2 is at or below the
    /// phase floor, or the exact transmitted mass underflowed.
    #[error("degenerate dark port at phi = {phi:e} rad: {reason}")]
    DegenerateDarkPort { phi: f64, reason: String },

    #[error("no signal: both detector halves recorded zero counts")]
    NoSignal,

    #[error("per-photon mode is limited to {limit:e} expected photons per trial (got {expected:e}); use poisson-count mode")]
    Tractability { expected: f64, limit: f64 },

    #[error("at least 2 trials are required (got {0})")]
    TooFewTrials(usize),

    #[error("{origin}: line {line}: {message}")]
    Config {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects NaN and infinities.
pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite (got {value})")))
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be > 0 (got {value})")))
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    finite(name, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be >= 0 (got {value})")))
    }
}
