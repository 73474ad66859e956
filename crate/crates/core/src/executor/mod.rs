//! Scheduling and execution of workflows on simulated resources.
//!
//! A run is planned with [`plan_execution`], then handed to an [`Executor`],
//! which returns a run id immediately and works in the background. Tools are
//! in-process [`ToolAdapter`]s; the five built-in stubs model the MD
//! post-processing chain.

mod adapter;
mod artifact;
pub mod chain;
mod engine;
#[cfg(feature = "exec")]
mod exec;
mod plan;
mod record;
mod resource;
pub mod stubs;

use thiserror::Error;

use crate::report::ValidationReport;
use crate::workflow::Endpoint;

pub use adapter::{
    AdapterError, AdapterErrorKind, AdapterRegistry, AdapterSpec, Input, Outputs, RunContext,
    ToolAdapter,
};
pub use artifact::{content_id, Artifact, Producer};
pub use engine::{
    execute, node_cost, node_seed, Executor, ExecutorConfig, RunInputs, TICKS_PER_UNIT,
};
#[cfg(feature = "exec")]
pub use exec::ExecAdapter;
pub use plan::{plan_execution, ExecutionPlan, Policy};
pub use record::{
    check_artifacts, check_dependency_order, check_slot_limits, ArtifactRef, EventKind,
    ExecutionRecord, NodeEvent, NodeOutcome, NodeState, RunSnapshot, RunStatus, RECORD_FILE,
};
pub use resource::{validate_pool, Resource, ResourceKind};

/// Tools with an in-process stub, sorted.
pub const BUILTIN_TOOLS: [&str; 5] = [
    "atomeye-stub",
    "debyer-stub",
    "ffmpeg-stub",
    "lammps-stub",
    "r-stub",
];

/// Prefix of the error recorded on a node whose adapter failed.
pub const ADAPTER_FAILURE: &str = "ADAPTER_FAILURE";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("resource pool is empty")]
    EmptyPool,
    #[error("invalid resource: {0}")]
    InvalidResource(String),
    #[error("invalid workflow:\n{0}")]
    InvalidWorkflow(ValidationReport),
    #[error("unknown policy {0:?}; expected round_robin or fastest_fit")]
    UnknownPolicy(String),
    #[error("plan does not fit the workflow: {0}")]
    PlanMismatch(String),
    #[error("no adapter for tool {tool} (node {node})")]
    AdapterMissing { node: String, tool: String },
    #[error("no input supplied for {0}")]
    MissingInput(Endpoint),
    #[error("input supplied for {0}, which is linked or undeclared")]
    UnexpectedInput(Endpoint),
    #[error("unknown run {0}")]
    UnknownRun(String),
    #[error("could not store run: {0}")]
    Storage(String),
}

impl ExecError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyPool => "EMPTY_POOL",
            Self::InvalidResource(_) => "INVALID_RESOURCE",
            Self::InvalidWorkflow(_) => "INVALID_WORKFLOW",
            Self::UnknownPolicy(_) => "UNKNOWN_POLICY",
            Self::PlanMismatch(_) => "PLAN_MISMATCH",
            Self::AdapterMissing { .. } => "ADAPTER_MISSING",
            Self::MissingInput(_) => "MISSING_INPUT",
            Self::UnexpectedInput(_) => "UNEXPECTED_INPUT",
            Self::UnknownRun(_) => "UNKNOWN_RUN",
            Self::Storage(_) => "STORAGE_FAILED",
        }
    }
}
