use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("{method}: {source}")]
    Method { method: String, source: fdenvelope_core::Error },
    #[error(transparent)]
    Core(#[from] fdenvelope_core::Error),
}

impl SimError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Config { field: field.into(), reason: reason.into() }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, SimError::Config { .. })
    }
}

pub type SimResult<T> = std::result::Result<T, SimError>;
