use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde::Serialize;
use yeargraph_core::dynamics::DynamicsError;
use yeargraph_core::layout::LayoutError;
use yeargraph_core::GraphError;

/// Error returned by every handler, rendered as `{"error": {"code", "message"}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "validation", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn gone(message: impl Into<String>) -> Self {
        Self::new(StatusCode::GONE, "session_expired", message)
    }
}

#[derive(Serialize)]
struct Body<'a> {
    error: Inner<'a>,
}

#[derive(Serialize)]
struct Inner<'a> {
    code: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            error: Inner {
                code: self.code,
                message: &self.message,
            },
        };
        (self.status, axum::Json(body)).into_response()
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::NotFound { .. } => ApiError::not_found(e.to_string()),
            _ => ApiError::validation(e.to_string()),
        }
    }
}

impl From<LayoutError> for ApiError {
    fn from(e: LayoutError) -> Self {
        match e {
            LayoutError::UnknownNode(_) => ApiError::not_found(e.to_string()),
            _ => ApiError::validation(e.to_string()),
        }
    }
}

impl From<DynamicsError> for ApiError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Graph(g) => g.into(),
            DynamicsError::MismatchedViews(_) => ApiError::validation(e.to_string()),
        }
    }
}
