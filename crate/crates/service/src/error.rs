use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::{json, Value};
use vistheme_core::refine::{DegenerateResolution, LabelError, RefineError};

/// JSON error body: `{code, message, ...extra}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub extra: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), extra: None }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn conflict(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn with(mut self, extra: Value) -> Self {
        self.extra = Some(extra);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.code, "message": self.message });
        if let (Some(Value::Object(extra)), Value::Object(map)) = (self.extra, &mut body) {
            map.extend(extra);
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<LabelError> for ApiError {
    fn from(e: LabelError) -> Self {
        let msg = e.to_string();
        match e {
            LabelError::EmptyTheme => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_theme", msg),
            LabelError::EmptyCoder => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_coder", msg),
            LabelError::AlreadyAdjudicated(_) => Self::conflict("already_adjudicated", msg),
            LabelError::NotSampled(_) => Self::not_found(msg),
            LabelError::TooManyCoders { .. } => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "too_many_coders", msg),
        }
    }
}

impl From<RefineError> for ApiError {
    fn from(e: RefineError) -> Self {
        let msg = e.to_string();
        match e {
            RefineError::Label(l) => l.into(),
            RefineError::NeedsLabels { clusters } => {
                Self::conflict("not_ready", msg).with(json!({ "clusters": clusters }))
            }
            RefineError::DegenerateSplit { clusters } => {
                let options: Vec<&str> = DegenerateResolution::ALL.iter().map(|r| r.as_str()).collect();
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "degenerate_split", msg)
                    .with(json!({ "clusters": clusters, "options": options }))
            }
            RefineError::Finished(_) => Self::conflict("finished", msg),
            RefineError::UnknownCluster(_) => Self::not_found(msg),
            _ => Self::internal(msg),
        }
    }
}
