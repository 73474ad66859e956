//! Duration classes.
//!
//! | level | nominal range  | upper bound used here |
//! |-------|----------------|-----------------------|
//! | nano  | 10-30 min      | 30 min                |
//! | micro | 1-8 hours      | 8 h                   |
//! | mini  | 1-14 days      | 14 days               |
//! | macro | 1-6 months     | open (> 6 months warns) |
//!
//! Durations between nominal ranges fall to the smaller level's neighbour
//! above, so every duration gets exactly one class.

use crate::registry::meta::{
    Duration, ScaleLevel, MINUTES_PER_DAY, MINUTES_PER_HOUR, MINUTES_PER_MONTH,
};
use crate::report::Finding;

pub const NANO_MAX_MINUTES: u64 = 30;
pub const MICRO_MAX_MINUTES: u64 = 8 * MINUTES_PER_HOUR;
pub const MINI_MAX_MINUTES: u64 = 14 * MINUTES_PER_DAY;
pub const MACRO_NOMINAL_MAX_MINUTES: u64 = 6 * MINUTES_PER_MONTH;

pub const OVERSIZE: &str = "OVERSIZE";

pub fn classify_scale(d: Duration) -> ScaleLevel {
    match d.minutes() {
        m if m <= NANO_MAX_MINUTES => ScaleLevel::Nano,
        m if m <= MICRO_MAX_MINUTES => ScaleLevel::Micro,
        m if m <= MINI_MAX_MINUTES => ScaleLevel::Mini,
        _ => ScaleLevel::Macro,
    }
}

/// Warning for durations beyond the nominal six-month macro range.
pub fn oversize_finding(d: Duration) -> Option<Finding> {
    (d.minutes() > MACRO_NOMINAL_MAX_MINUTES).then(|| {
        Finding::warning(
            OVERSIZE,
            Some("duration".into()),
            format!(
                "{} exceeds the nominal macro range of {MACRO_NOMINAL_MAX_MINUTES} min",
                d
            ),
        )
    })
}
