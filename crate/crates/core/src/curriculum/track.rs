use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::registry::{Duration, ModuleId, ModuleMeta, ScaleLevel};
use crate::report::{Finding, ValidationReport};

use super::graph::PrereqGraph;
use super::CurriculumError;

pub const PREREQ_UNSATISFIED: &str = "PREREQ_UNSATISFIED";
pub const CONSTRAINT_VIOLATION: &str = "CONSTRAINT_VIOLATION";
pub const DUPLICATE_ENTRY: &str = "DUPLICATE_ENTRY";

/// An ordered learning path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseTrack {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub entries: Vec<ModuleId>,
    #[serde(default)]
    pub created_by: String,
}

impl CourseTrack {
    pub fn new(id: impl Into<String>, title: impl Into<String>, entries: Vec<ModuleId>) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            entries,
            created_by: String::new(),
        }
    }

    /// Non-empty and free of repeated modules.
    pub fn is_publishable(&self) -> bool {
        let unique: BTreeSet<&ModuleId> = self.entries.iter().collect();
        !self.entries.is_empty() && unique.len() == self.entries.len()
    }
}

/// Optional bounds a track must respect.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackConstraints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_total_minutes: Option<Duration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_complexity: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_scales: Option<BTreeSet<ScaleLevel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_language: Option<String>,
}

impl TrackConstraints {
    pub fn validate(&self) -> Result<(), CurriculumError> {
        if let Some(c) = self.max_complexity {
            if !(1..=5).contains(&c) {
                return Err(CurriculumError::InvalidConstraints(format!(
                    "max_complexity must be 1-5, got {c}"
                )));
            }
        }
        if let Some(lang) = &self.required_language {
            if lang.trim().is_empty() {
                return Err(CurriculumError::InvalidConstraints(
                    "required_language must not be empty".into(),
                ));
            }
        }
        Ok(())
    }

    /// Why a single module cannot appear in a track under these constraints.
    pub fn module_violation(&self, m: &ModuleMeta) -> Option<String> {
        if let Some(max) = self.max_complexity {
            if m.complexity > max {
                return Some(format!(
                    "{} has complexity {} above the limit {max}",
                    m.id, m.complexity
                ));
            }
        }
        if let Some(scales) = &self.allowed_scales {
            if !scales.contains(&m.scale) {
                return Some(format!("{} has scale {} which is not allowed", m.id, m.scale));
            }
        }
        if let Some(lang) = &self.required_language {
            if !m.has_language(lang) {
                return Some(format!("{} is not offered in {lang}", m.id));
            }
        }
        None
    }

    pub fn admits(&self, m: &ModuleMeta) -> bool {
        self.module_violation(m).is_none()
    }
}

/// Check order-sensitive prerequisite satisfaction and constraints.
///
/// A prerequisite `p` of entry `m` is met when an earlier entry is `p` or an
/// alternative of `p` (declared in either direction).
pub fn check_track(
    track: &CourseTrack,
    graph: &PrereqGraph,
    constraints: Option<&TrackConstraints>,
) -> Result<ValidationReport, CurriculumError> {
    if let Some(unknown) = track.entries.iter().find(|e| !graph.contains(e.as_str())) {
        return Err(CurriculumError::UnknownModule(unknown.to_string()));
    }
    if let Some(c) = constraints {
        c.validate()?;
    }

    let mut report = ValidationReport::new();
    let mut seen: BTreeSet<&ModuleId> = BTreeSet::new();
    for (pos, entry) in track.entries.iter().enumerate() {
        if !seen.insert(entry) {
            report.push(Finding::error(
                DUPLICATE_ENTRY,
                Some(entry.to_string()),
                format!("{entry} appears more than once (position {pos})"),
            ));
        }
        let earlier = &track.entries[..pos];
        for req in graph.requires(entry.as_str()) {
            if !earlier.iter().any(|e| graph.satisfies(e.as_str(), req.as_str())) {
                report.push(Finding::error(
                    PREREQ_UNSATISFIED,
                    Some(entry.to_string()),
                    format!("{entry} requires {req} (or an alternative) earlier in the track"),
                ));
            }
        }
    }

    if let Some(c) = constraints {
        for entry in &track.entries {
            let meta = graph.module(entry.as_str()).expect("entries resolved above");
            if let Some(why) = c.module_violation(meta) {
                report.push(Finding::error(
                    CONSTRAINT_VIOLATION,
                    Some(entry.to_string()),
                    why,
                ));
            }
        }
        if let Some(max) = c.max_total_minutes {
            let total: u64 = track
                .entries
                .iter()
                .filter_map(|e| graph.module(e.as_str()))
                .map(|m| m.duration.minutes())
                .sum();
            if total > max.minutes() {
                report.push(Finding::error(
                    CONSTRAINT_VIOLATION,
                    Some("max_total_minutes".into()),
                    format!("total duration {total} min exceeds {} min", max.minutes()),
                ));
            }
        }
    }
    Ok(report)
}

/// The prerequisite of a `PREREQ_UNSATISFIED` finding's entry that is unmet,
/// together with every module that would satisfy it.
pub fn satisfying_candidates(
    track: &CourseTrack,
    graph: &PrereqGraph,
    entry: &str,
) -> Vec<(ModuleId, Vec<ModuleId>)> {
    let Some(pos) = track.entries.iter().position(|e| e.as_str() == entry) else {
        return Vec::new();
    };
    let earlier = &track.entries[..pos];
    graph
        .requires(entry)
        .iter()
        .filter(|req| !earlier.iter().any(|e| graph.satisfies(e.as_str(), req.as_str())))
        .map(|req| {
            (
                req.clone(),
                graph.satisfiers(req.as_str()).into_iter().cloned().collect(),
            )
        })
        .collect()
}
