use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use fdenvelope_core::Error as CoreError;
use serde::Serialize;

/// Error response: `{"error": message, "field": path}` with the status code.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub field: Option<String>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), field: None }
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn bad_request(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message).with_field(field)
    }

    pub fn unprocessable(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message).with_field(field)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no dataset with id `{id}`"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }

    /// Maps a library error raised while fitting or querying a stored dataset.
    pub fn from_query(err: CoreError) -> Self {
        let message = err.to_string();
        match err {
            CoreError::InvalidAlpha { .. } => Self::unprocessable("alpha", message),
            CoreError::UnknownMethod(_) => Self::unprocessable("method", message),
            CoreError::IndexOutOfRange { .. } => Self::unprocessable("selection", message),
            CoreError::InvalidInput { field, .. } => Self::unprocessable(field, message),
            CoreError::Contract(_) | CoreError::DegenerateRatio { .. } => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
            }
            CoreError::NotNested | CoreError::Io(_) => Self::internal(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body { error: &self.message, field: self.field.as_deref() };
        (self.status, Json(body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
