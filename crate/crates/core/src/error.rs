use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input at `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },
    #[error("alpha must lie in {range}, got {alpha}")]
    InvalidAlpha { alpha: f64, range: &'static str },
    #[error("cdf {index} reaches 1 at {at}; the ratio F(t)/(1-F(s)) is undefined")]
    DegenerateRatio { index: usize, at: f64 },
    #[error("reference family is not nested")]
    NotNested,
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("index {index} out of range for m = {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks `alpha` in (0, 1).
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha { alpha, range: "(0, 1)" })
    }
}
