use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

use reu_core::procedure::FieldIssue;

use crate::store::SessionState;

pub type ServiceResult<T> = Result<T, ServiceError>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid configuration")]
    InvalidConfig(Vec<FieldIssue>),

    #[error("bad request: {0}")]
    BadRequest(String),

    #[error("no session `{0}`")]
    NotFound(String),

    #[error("query {got} is not the pending query {expected}")]
    Conflict { expected: u64, got: u64 },

    #[error("session {id} is {state:?} and takes no answers")]
    InvalidState { id: String, state: SessionState },

    #[error(transparent)]
    Core(#[from] reu_core::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::InvalidConfig(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict { .. } => StatusCode::CONFLICT,
            ServiceError::InvalidState { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Core(_) | ServiceError::Io(_) | ServiceError::Json(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::InvalidConfig(_) => "invalid_config",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Conflict { .. } => "conflict",
            ServiceError::InvalidState { .. } => "invalid_state",
            _ => "internal",
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let mut body = json!({ "error": self.code(), "message": self.to_string() });
        match &self {
            ServiceError::InvalidConfig(fields) => body["fields"] = json!(fields),
            ServiceError::Conflict { expected, .. } => body["pending_query_id"] = json!(expected),
            ServiceError::InvalidState { state, .. } => body["state"] = json!(state),
            _ => {}
        }
        (status, Json(body)).into_response()
    }
}
