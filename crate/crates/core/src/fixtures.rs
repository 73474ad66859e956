//! Sample data shared by tests, examples and documentation.
//!
//! The JSON sources live in `crates/core/fixtures/`: the materials-science
//! module set around "MD Simulation of Metal Nanocrystals under Deformation"
//! and the three MD post-processing pipelines (simulation + plotting, + frames
//! and video, + diffraction histogram).

use crate::executor::Resource;
use crate::registry::{Duration, ModuleId, ModuleMeta, WorkloadRange};
use crate::workflow::{deserialize_workflow, Workflow};

pub const TABLE1_ID: &str = "md-simulation-of-metal-nanocrystals-under-deformation";

pub const TABLE1_MODULE_JSON: &str = include_str!("../fixtures/table1-module.json");
pub const TABLE1_MODULES_JSON: &str = include_str!("../fixtures/table1-modules.json");
pub const PIPELINE_1_JSON: &str = include_str!("../fixtures/pipeline-1.json");
pub const PIPELINE_2_JSON: &str = include_str!("../fixtures/pipeline-2.json");
pub const PIPELINE_3_JSON: &str = include_str!("../fixtures/pipeline-3.json");
pub const POOL_JSON: &str = include_str!("../fixtures/pool.json");
pub const TRACK_JSON: &str = include_str!("../fixtures/track.json");

/// The single module record described by the reference meta-information table.
pub fn table1_module() -> ModuleMeta {
    serde_json::from_str(TABLE1_MODULE_JSON).expect("table1 fixture parses")
}

/// The reference module together with its prerequisite, alternative and
/// continuation, so all its references resolve.
pub fn table1_fixture_set() -> Vec<ModuleMeta> {
    serde_json::from_str(TABLE1_MODULES_JSON).expect("module fixture set parses")
}

/// MD pipeline `n` (1, 2 or 3).
pub fn pipeline(n: u8) -> Workflow {
    let text = match n {
        1 => PIPELINE_1_JSON,
        2 => PIPELINE_2_JSON,
        3 => PIPELINE_3_JSON,
        _ => panic!("pipelines are numbered 1-3, got {n}"),
    };
    deserialize_workflow(text.as_bytes()).expect("pipeline fixture parses")
}

/// A cluster with two fast slots and a single-slot PC.
pub fn pool() -> Vec<Resource> {
    serde_json::from_str(POOL_JSON).expect("pool fixture parses")
}

pub fn id(slug: &str) -> ModuleId {
    ModuleId::new(slug).expect("fixture ids are valid slugs")
}

/// One-week module with a 1 h/week workload and the given prerequisites.
pub fn module(slug: &str, previous: &[&str]) -> ModuleMeta {
    module_with_cost(slug, previous, 1, 1.0)
}

/// Module whose planner cost is `weeks * hours_per_week`.
pub fn module_with_cost(slug: &str, previous: &[&str], weeks: u64, hours_per_week: f64) -> ModuleMeta {
    let duration = Duration::from_weeks(weeks).expect("weeks > 0");
    let mut m = ModuleMeta::new(
        id(slug),
        slug.replace('-', " "),
        crate::curriculum::classify_scale(duration),
        duration,
        WorkloadRange::single(hours_per_week),
    );
    m.previous = previous.iter().map(|p| id(p)).collect();
    m
}

/// `d` needs `b` and `c`; both need `a`. All modules cost the same.
pub fn diamond() -> Vec<ModuleMeta> {
    vec![
        module("a", &[]),
        module("b", &["a"]),
        module("c", &["a"]),
        module("d", &["b", "c"]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::ScaleLevel;

    #[test]
    fn fixtures_load() {
        let m = table1_module();
        assert_eq!(m.id.as_str(), TABLE1_ID);
        assert_eq!(m.scale, ScaleLevel::Mini);
        assert_eq!(m.duration.minutes(), 2 * 7 * 24 * 60);
        assert_eq!(table1_fixture_set().len(), 4);
        for n in 1..=3 {
            assert_eq!(pipeline(n).id.as_str(), format!("md-pipeline-{n}"));
        }
        assert_eq!(pool().len(), 2);
    }
}
