use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use dronecine_core::Error as CoreError;
use dronecine_protocol::{ApiErrorBody, ErrorCode};

/// Structured failure returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError(pub ApiErrorBody);

impl ApiError {
    pub fn new(code: ErrorCode, field: Option<String>, reason: impl Into<String>) -> Self {
        ApiError(ApiErrorBody {
            code,
            field,
            reason: reason.into(),
        })
    }

    pub fn conflict(reason: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::Conflict, None, reason)
    }

    pub fn not_found(field: &str, reason: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::NotFound, Some(field.to_string()), reason)
    }

    pub fn validation(field: &str, reason: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::Validation, Some(field.to_string()), reason)
    }

    pub fn code(&self) -> ErrorCode {
        self.0.code
    }

    pub fn status(&self) -> StatusCode {
        match self.0.code {
            ErrorCode::Parse => StatusCode::BAD_REQUEST,
            ErrorCode::Validation | ErrorCode::Integrity | ErrorCode::Version => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for ApiError {}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::Parse(_) => ErrorCode::Parse,
            CoreError::Version(_) => ErrorCode::Version,
            CoreError::Integrity { .. } => ErrorCode::Integrity,
            _ => ErrorCode::Validation,
        };
        let field = match &e {
            CoreError::Integrity { context, .. } => Some(context.clone()),
            other => other.field().map(str::to_string),
        };
        ApiError::new(code, field, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.0)).into_response()
    }
}
