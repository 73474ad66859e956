//! Prerequisite graph, track checking and planning, scale classes and
//! course aggregates.
//!
//! Everything here is a pure function over an immutable [`PrereqGraph`]
//! snapshot and can be called from any number of threads.

mod aggregate;
mod graph;
pub mod planner;
pub mod scale;
mod track;

use thiserror::Error;

use crate::registry::ModuleId;

pub use aggregate::{aggregate, CourseAggregate, HoursRange};
pub use graph::{ModuleSource, PrereqGraph, NEXT_WITHOUT_PREVIOUS};
pub use planner::{costs_equal, module_cost, plan_track, track_cost, COST_TOLERANCE};
pub use scale::classify_scale;
pub use track::{
    check_track, satisfying_candidates, CourseTrack, TrackConstraints, CONSTRAINT_VIOLATION,
    DUPLICATE_ENTRY, PREREQ_UNSATISFIED,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurriculumError {
    #[error("prerequisite cycle: {}", join(.0))]
    CycleDetected(Vec<ModuleId>),
    #[error("module {0} appears twice in the input")]
    DuplicateModule(ModuleId),
    #[error("unknown module {0}")]
    UnknownModule(String),
    #[error("no valid track: {0}")]
    Unsatisfiable(String),
    #[error("{module} requires {prereq}, which is not available")]
    UnresolvedPrereq { module: ModuleId, prereq: ModuleId },
    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),
}

impl CurriculumError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::CycleDetected(_) => "CYCLE_DETECTED",
            Self::DuplicateModule(_) => "DUPLICATE_MODULE",
            Self::UnknownModule(_) => "UNKNOWN_MODULE",
            Self::Unsatisfiable(_) => "UNSATISFIABLE",
            Self::UnresolvedPrereq { .. } => "UNRESOLVED_PREREQ",
            Self::InvalidConstraints(_) => "INVALID_CONSTRAINTS",
        }
    }
}

fn join(ids: &[ModuleId]) -> String {
    ids.iter()
        .map(ModuleId::as_str)
        .collect::<Vec<_>>()
        .join(" -> ")
}

/// Build a graph from a module list. Alias kept close to the other entry points.
pub fn build_graph(modules: &[crate::registry::ModuleMeta]) -> Result<PrereqGraph, CurriculumError> {
    PrereqGraph::build(modules)
}
