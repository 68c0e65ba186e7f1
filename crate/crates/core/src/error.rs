use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter outside its admissible domain.
    #[error("{name} = {value}: {reason}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("material table line {line}: {message}")]
    MaterialParse { line: usize, message: String },

    #[error("unknown material '{0}'")]
    UnknownMaterial(String),

    #[error("unknown device kind '{0}' (expected wire, qpc or set)")]
    UnknownDevice(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("operating point: {0}")]
    InconsistentOperatingPoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::ParameterDomain {
            name,
            value,
            reason,
        }
    }
}

/// Reject NaN/inf and anything not strictly positive.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "must be finite and > 0"))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "must be finite and >= 0"))
    }
}
