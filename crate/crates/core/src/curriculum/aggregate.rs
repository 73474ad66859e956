use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::registry::{Price, ScaleLevel};

use super::graph::ModuleSource;
use super::track::CourseTrack;
use super::CurriculumError;

/// Total study hours over a track, as a range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HoursRange {
    pub min_hours: f64,
    pub max_hours: f64,
}

/// Course-level totals of a track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseAggregate {
    pub total_minutes: u64,
    /// Sum over modules of duration in weeks times weekly workload.
    pub workload_hours: HoursRange,
    /// Zero for an empty track.
    pub max_complexity: u8,
    pub total_exercises: u64,
    pub total_price: Price,
    pub scale_histogram: BTreeMap<ScaleLevel, u64>,
}

impl Default for CourseAggregate {
    fn default() -> Self {
        Self {
            total_minutes: 0,
            workload_hours: HoursRange::default(),
            max_complexity: 0,
            total_exercises: 0,
            total_price: Price::ZERO,
            scale_histogram: ScaleLevel::ALL.iter().map(|s| (*s, 0)).collect(),
        }
    }
}

impl CourseAggregate {
    pub fn total_weeks(&self) -> f64 {
        self.total_minutes as f64 / crate::registry::meta::MINUTES_PER_WEEK as f64
    }

    /// Field-wise combination of two aggregates over disjoint tracks.
    pub fn combine(&self, other: &Self) -> Self {
        let mut hist = self.scale_histogram.clone();
        for (scale, n) in &other.scale_histogram {
            *hist.entry(*scale).or_default() += n;
        }
        Self {
            total_minutes: self.total_minutes + other.total_minutes,
            workload_hours: HoursRange {
                min_hours: self.workload_hours.min_hours + other.workload_hours.min_hours,
                max_hours: self.workload_hours.max_hours + other.workload_hours.max_hours,
            },
            max_complexity: self.max_complexity.max(other.max_complexity),
            total_exercises: self.total_exercises + other.total_exercises,
            total_price: self.total_price + other.total_price,
            scale_histogram: hist,
        }
    }
}

pub fn aggregate<S: ModuleSource + ?Sized>(
    track: &CourseTrack,
    source: &S,
) -> Result<CourseAggregate, CurriculumError> {
    let mut agg = CourseAggregate::default();
    for entry in &track.entries {
        let meta = source
            .lookup(entry.as_str())
            .ok_or_else(|| CurriculumError::UnknownModule(entry.to_string()))?;
        let weeks = meta.duration.weeks();
        agg.total_minutes += meta.duration.minutes();
        agg.workload_hours.min_hours += weeks * meta.workload.min_hours_per_week;
        agg.workload_hours.max_hours += weeks * meta.workload.max_hours_per_week;
        agg.max_complexity = agg.max_complexity.max(meta.complexity);
        agg.total_exercises += u64::from(meta.exercises);
        agg.total_price = agg.total_price + meta.price;
        *agg.scale_histogram.entry(meta.scale).or_default() += 1;
    }
    Ok(agg)
}
