use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: String, reason: String },

    #[error("latitude {0} is outside the supported conversion domain (|lat| < 89.9)")]
    UnsupportedLatitude(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("chase heading is undefined: target is stationary at t = {time}")]
    DegenerateHeading { time: f64 },

    #[error("shot has zero length: {0}")]
    ZeroLength(String),

    #[error("point ({east}, {north}) is outside the terrain bounds")]
    OutOfBounds { east: f64, north: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported schema version: {0}")]
    Version(String),

    #[error("integrity error: dangling or duplicate reference `{id}` ({context})")]
    Integrity { id: String, context: String },

    #[error("export error: {0}")]
    Export(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Field path associated with the error, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::InvalidArgument { field, .. } => Some(field),
            Error::Integrity { id, .. } => Some(id),
            _ => None,
        }
    }
}

pub(crate) fn ensure_finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be finite"))
    }
}

pub(crate) fn ensure_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be strictly positive, got {value}")))
    }
}
