use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;

use crate::wire::ApiEnvelope;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    /// The request parsed but describes a visualization the schema cannot support.
    #[error(transparent)]
    InvalidSpec(nextview_core::Error),
    #[error("`{0}` was never served to this session")]
    NotServed(String),
    #[error("malformed request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Dataset(nextview_core::Error),
}

impl ServiceError {
    /// Sorts a core error into "the input could not be read" and "the
    /// requested view is invalid".
    pub fn from_core(e: nextview_core::Error) -> Self {
        use nextview_core::Error as E;
        match e {
            E::UnknownColumn(_) | E::UnsupportedSpec(_) | E::InvalidFilter { .. } => ServiceError::InvalidSpec(e),
            _ => ServiceError::Dataset(e),
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownDataset(_) | ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::InvalidSpec(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::NotServed(_) => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) | ServiceError::Dataset(_) => StatusCode::BAD_REQUEST,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownDataset(_) => "unknown_dataset",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::InvalidSpec(_) => "invalid_spec",
            ServiceError::NotServed(_) => "not_served",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Dataset(_) => "bad_dataset",
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(ApiEnvelope::err(self.code(), self.to_string()))).into_response()
    }
}
