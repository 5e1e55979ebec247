use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;

use vizassist_core::ast::AstError;
use vizassist_core::augment::AugmentError;
use vizassist_core::classifier::ClassifierError;
use vizassist_core::corpus::CorpusError;
use vizassist_core::dataset::DatasetError;
use vizassist_core::fitter::FitError;
use vizassist_core::mdp::MdpError;
use vizassist_core::templates::TemplateError;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    SessionNotFound(String),
    #[error("the session has no dataset")]
    NoDataset,
    #[error(
        "no visualization type is known for this session; select a template or classify its output"
    )]
    NoVisualization,
    #[error("no template has been fitted in this session")]
    NotFitted,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("request body exceeds {limit} bytes")]
    PayloadTooLarge { limit: usize },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Ast(#[from] AstError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("event log replay failed: {0}")]
    Replay(String),
}

impl ServiceError {
    /// Machine-readable code; module errors keep their own codes.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::SessionNotFound(_) => "SessionNotFound",
            ServiceError::NoDataset => "NoDataset",
            ServiceError::NoVisualization => "NoVisualization",
            ServiceError::NotFitted => "NotFitted",
            ServiceError::InvalidRequest(_) => "InvalidRequest",
            ServiceError::PayloadTooLarge { .. } => "PayloadTooLarge",
            ServiceError::Dataset(e) => e.code(),
            ServiceError::Fit(e) => e.code(),
            ServiceError::Template(e) => e.code(),
            ServiceError::Augment(e) => e.code(),
            ServiceError::Mdp(e) => e.code(),
            ServiceError::Classifier(e) => e.code(),
            ServiceError::Ast(e) => e.code(),
            ServiceError::Corpus(e) => e.code(),
            ServiceError::Replay(_) => "ReplayFailed",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::SessionNotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::PayloadTooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
            ServiceError::Replay(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::Augment(AugmentError::Internal(_)) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code(), "message": self.to_string() } });
        (self.status(), Json(body)).into_response()
    }
}
