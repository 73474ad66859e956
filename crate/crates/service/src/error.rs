use std::path::PathBuf;

use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use coursegate::curriculum::CurriculumError;
use coursegate::executor::ExecError;
use coursegate::registry::RegistryError;
use coursegate::workflow::WorkflowError;
use coursegate::ValidationReport;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NOT_FOUND: &str = "NOT_FOUND";
pub const BAD_REQUEST: &str = "BAD_REQUEST";

/// Error body shared by the HTTP API and the CLI. `code` is the module error
/// code verbatim, so both front ends speak one vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<ValidationReport>,
}

impl ApiError {
    /// Status is derived from the code so every path agrees on it.
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            status: status_for(code).as_u16(),
            code: code.to_string(),
            message: message.into(),
            details: None,
        }
    }

    pub fn with_details(mut self, report: ValidationReport) -> Self {
        self.details = Some(report);
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(BAD_REQUEST, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(NOT_FOUND, message)
    }

    pub fn status(&self) -> StatusCode {
        StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    }
}

/// 404 for unknown ids, 409 for id collisions, 400 for unparseable input,
/// 500 for storage, 422 for every other domain rejection.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        NOT_FOUND | "UNKNOWN_MODULE" | "UNKNOWN_WORKFLOW" | "UNKNOWN_RUN" | "UNKNOWN_NODE" => {
            StatusCode::NOT_FOUND
        }
        "DUPLICATE_ID" | "DUPLICATE_WORKFLOW" => StatusCode::CONFLICT,
        BAD_REQUEST | "MALFORMED_ARCHIVE" | "MALFORMED_WORKFLOW" => StatusCode::BAD_REQUEST,
        "STORAGE_FAILED" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = coursegate::canonical::to_vec(&self).expect("error bodies always serialize");
        (self.status(), [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        let err = Self::new(e.code(), e.to_string());
        match e {
            RegistryError::ValidationFailed(report) => err.with_details(report),
            _ => err,
        }
    }
}

impl From<CurriculumError> for ApiError {
    fn from(e: CurriculumError) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

impl From<WorkflowError> for ApiError {
    fn from(e: WorkflowError) -> Self {
        let err = Self::new(e.code(), e.to_string());
        match e {
            WorkflowError::InvalidWorkflow(report) => err.with_details(report),
            _ => err,
        }
    }
}

impl From<ExecError> for ApiError {
    fn from(e: ExecError) -> Self {
        let err = Self::new(e.code(), e.to_string());
        match e {
            ExecError::InvalidWorkflow(report) => err.with_details(report),
            _ => err,
        }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

/// Failures of the service process itself rather than of one request.
#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("data directory {} is not writable: {reason}", .path.display())]
    DataDirUnwritable { path: PathBuf, reason: String },
    #[error("could not persist state: {0}")]
    Storage(String),
    #[error("stored repository is unreadable: {0}")]
    CorruptRepository(RegistryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::PortInUse(_) => "PORT_IN_USE",
            Self::DataDirUnwritable { .. } => "DATA_DIR_UNWRITABLE",
            Self::Storage(_) | Self::Io(_) => "STORAGE_FAILED",
            Self::CorruptRepository(e) => e.code(),
        }
    }
}
