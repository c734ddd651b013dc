use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;

use crate::api::ErrorBody;

/// Error with an HTTP status and a machine-readable code.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>, field: Option<&str>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
                field: field.map(str::to_string),
            },
        }
    }

    pub fn invalid(field: Option<&str>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_input", message, field)
    }

    pub fn unknown_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`"), None)
    }

    pub fn wrong_phase(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "wrong_phase", message, None)
    }

    pub fn idempotency_conflict(key: &str) -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "idempotency_key_reused",
            format!("idempotency key `{key}` was used for a different request"),
            None,
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message, None)
    }
}

impl From<cirl_core::Error> for ApiError {
    fn from(e: cirl_core::Error) -> Self {
        match &e {
            cirl_core::Error::Config { field, message } => {
                ApiError::new(StatusCode::BAD_REQUEST, "invalid_config", message.clone(), Some(field))
            }
            cirl_core::Error::InvalidInput(_) | cirl_core::Error::ConfigSyntax(_) => {
                ApiError::invalid(None, e.to_string())
            }
            cirl_core::Error::Io(_) => ApiError::internal(e.to_string()),
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({}): {}", self.body.code, self.status, self.body.message)
    }
}

impl std::error::Error for ApiError {}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
