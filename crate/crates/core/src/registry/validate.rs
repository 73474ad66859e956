use std::collections::BTreeSet;

use crate::curriculum::scale::{classify_scale, oversize_finding};
use crate::report::{Finding, ValidationReport};

use super::meta::{ModuleId, ModuleMeta, RatingAggregate};

pub const MISSING_ENGLISH: &str = "MISSING_ENGLISH";
pub const SELF_REFERENCE: &str = "SELF_REFERENCE";
pub const BAD_COMPLEXITY: &str = "BAD_COMPLEXITY";
pub const EMPTY_TITLE: &str = "EMPTY_TITLE";
pub const BAD_WORKLOAD: &str = "BAD_WORKLOAD";
pub const BAD_RATING: &str = "BAD_RATING";
pub const NEGATIVE_PRICE: &str = "NEGATIVE_PRICE";
pub const BAD_CATEGORY: &str = "BAD_CATEGORY";
pub const UNRESOLVED_REFERENCE: &str = "UNRESOLVED_REFERENCE";
pub const SCALE_MISMATCH: &str = "SCALE_MISMATCH";

/// Check one record against the meta-information rules.
///
/// Structural problems are errors; references to ids outside `known_ids`
/// and scale/duration disagreements are warnings. Never fails.
pub fn validate_meta(meta: &ModuleMeta, known_ids: &BTreeSet<ModuleId>) -> ValidationReport {
    let mut report = ValidationReport::new();

    if meta.title.trim().is_empty() {
        report.push(Finding::error(
            EMPTY_TITLE,
            Some("title".into()),
            "title must not be empty",
        ));
    }

    if !meta.has_language("English") {
        report.push(Finding::error(
            MISSING_ENGLISH,
            Some("languages".into()),
            format!("English must be one of the languages, got {:?}", meta.languages),
        ));
    }

    for (field, ids) in [
        ("previous", &meta.previous),
        ("next", &meta.next),
        ("alternatives", &meta.alternatives),
    ] {
        if ids.contains(&meta.id) {
            report.push(Finding::error(
                SELF_REFERENCE,
                Some(field.into()),
                format!("module {} lists itself in {field}", meta.id),
            ));
        }
    }

    if !(1..=5).contains(&meta.complexity) {
        report.push(Finding::error(
            BAD_COMPLEXITY,
            Some("complexity".into()),
            format!("complexity must be 1-5, got {}", meta.complexity),
        ));
    }

    if !meta.workload.is_valid() {
        report.push(Finding::error(
            BAD_WORKLOAD,
            Some("workload".into()),
            format!(
                "workload needs 0 < min <= max, got [{}, {}]",
                meta.workload.min_hours_per_week, meta.workload.max_hours_per_week
            ),
        ));
    }

    if !meta.rating.is_consistent() {
        report.push(Finding::error(
            BAD_RATING,
            Some("rating".into()),
            format!(
                "sum {} cannot come from {} votes of {}-{} stars",
                meta.rating.sum,
                meta.rating.count,
                RatingAggregate::MIN_STARS,
                RatingAggregate::MAX_STARS
            ),
        ));
    }

    if meta.price.is_negative() {
        report.push(Finding::error(
            NEGATIVE_PRICE,
            Some("price".into()),
            format!("price must be non-negative, got {}", meta.price),
        ));
    }

    for category in &meta.categories {
        if category.split(':').any(|seg| seg.trim().is_empty()) {
            report.push(Finding::error(
                BAD_CATEGORY,
                Some("categories".into()),
                format!("category path {category:?} has an empty segment"),
            ));
        }
    }

    let mut seen = BTreeSet::new();
    for id in meta.references() {
        if id != &meta.id && !known_ids.contains(id) && seen.insert(id) {
            report.push(Finding::warning(
                UNRESOLVED_REFERENCE,
                Some(id.to_string()),
                format!("{id} is not a known module"),
            ));
        }
    }

    let expected = classify_scale(meta.duration);
    if expected != meta.scale {
        report.push(Finding::warning(
            SCALE_MISMATCH,
            Some("scale".into()),
            format!(
                "declared scale {} but a duration of {} classifies as {expected}",
                meta.scale, meta.duration
            ),
        ));
    }
    if let Some(f) = oversize_finding(meta.duration) {
        report.push(f);
    }

    report
}
