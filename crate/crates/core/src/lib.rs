//! Course modules as composable bricks.
//!
//! * [`registry`]: module metadata, validation, search, ratings and the JSON
//!   repository archive.
//! * [`curriculum`]: the prerequisite graph, track checking, the cost-minimal
//!   track planner, aggregates and scale classification.
//! * [`workflow`]: DAGs of tool crates with typed ports.
//! * [`executor`]: logical-time execution of workflows on simulated
//!   resources, with content-addressed artifacts.
//!
//! ```
//! use coursegate::{curriculum, fixtures, registry::Registry};
//!
//! let registry = Registry::new();
//! for m in fixtures::table1_fixture_set() {
//!     registry.register_module(m).unwrap();
//! }
//! let graph = curriculum::PrereqGraph::from_registry(&registry).unwrap();
//! let track = curriculum::plan_track(fixtures::TABLE1_ID, &graph, None).unwrap();
//! assert_eq!(track.entries.len(), 2);
//! ```

pub mod canonical;
pub mod curriculum;
pub mod executor;
pub mod fixtures;
pub mod registry;
pub mod report;
pub mod workflow;

pub use report::{Finding, Severity, ValidationReport};
