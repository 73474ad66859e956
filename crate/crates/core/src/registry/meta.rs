//! Module meta-information: the record every course module carries so that
//! modules from different authors can be searched and chained together.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

pub const MAX_ID_LEN: usize = 128;

pub const MINUTES_PER_HOUR: u64 = 60;
pub const MINUTES_PER_DAY: u64 = 24 * MINUTES_PER_HOUR;
pub const MINUTES_PER_WEEK: u64 = 7 * MINUTES_PER_DAY;
pub const MINUTES_PER_MONTH: u64 = 30 * MINUTES_PER_DAY;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetaError {
    #[error("invalid module id {0:?}: expected [a-z0-9][a-z0-9-]* of at most 128 characters")]
    InvalidId(String),
    #[error("duration must be at least one minute")]
    ZeroDuration,
    #[error("unknown scale level {0:?}")]
    UnknownScale(String),
    #[error("unknown module kind {0:?}")]
    UnknownKind(String),
}

/// Slug identifying a module inside a registry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModuleId(String);

impl ModuleId {
    pub fn new(slug: impl Into<String>) -> Result<Self, MetaError> {
        let slug = slug.into();
        if is_valid_slug(&slug) {
            Ok(Self(slug))
        } else {
            Err(MetaError::InvalidId(slug))
        }
    }

    /// Slug derived from a display title: lowercase, whitespace to hyphens,
    /// punctuation stripped.
    ///
    /// Returns `None` when nothing usable is left (e.g. a title made only of
    /// punctuation).
    pub fn from_title(title: &str) -> Option<Self> {
        let mut slug = String::with_capacity(title.len());
        for ch in title.chars().flat_map(char::to_lowercase) {
            if ch.is_ascii_alphanumeric() {
                slug.push(ch);
            } else if (ch.is_whitespace() || ch == '-' || ch == '_') && !slug.ends_with('-') {
                slug.push('-');
            }
        }
        let slug = slug.trim_matches('-');
        let slug = if slug.len() > MAX_ID_LEN {
            slug[..MAX_ID_LEN].trim_end_matches('-')
        } else {
            slug
        };
        Self::new(slug).ok()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn is_valid_slug(s: &str) -> bool {
    let bytes = s.as_bytes();
    !bytes.is_empty()
        && bytes.len() <= MAX_ID_LEN
        && (bytes[0].is_ascii_lowercase() || bytes[0].is_ascii_digit())
        && bytes
            .iter()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || *b == b'-')
}

impl TryFrom<String> for ModuleId {
    type Error = MetaError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ModuleId> for String {
    fn from(id: ModuleId) -> Self {
        id.0
    }
}

impl FromStr for ModuleId {
    type Err = MetaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ModuleId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for ModuleId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Module length, normalised to whole minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Duration(u64);

impl Duration {
    pub fn from_minutes(minutes: u64) -> Result<Self, MetaError> {
        if minutes == 0 {
            Err(MetaError::ZeroDuration)
        } else {
            Ok(Self(minutes))
        }
    }

    pub fn from_hours(hours: u64) -> Result<Self, MetaError> {
        Self::from_minutes(hours * MINUTES_PER_HOUR)
    }

    pub fn from_days(days: u64) -> Result<Self, MetaError> {
        Self::from_minutes(days * MINUTES_PER_DAY)
    }

    pub fn from_weeks(weeks: u64) -> Result<Self, MetaError> {
        Self::from_minutes(weeks * MINUTES_PER_WEEK)
    }

    pub fn from_months(months: u64) -> Result<Self, MetaError> {
        Self::from_minutes(months * MINUTES_PER_MONTH)
    }

    pub fn minutes(self) -> u64 {
        self.0
    }

    pub fn weeks(self) -> f64 {
        self.0 as f64 / MINUTES_PER_WEEK as f64
    }
}

impl TryFrom<u64> for Duration {
    type Error = MetaError;

    fn try_from(value: u64) -> Result<Self, Self::Error> {
        Self::from_minutes(value)
    }
}

impl From<Duration> for u64 {
    fn from(d: Duration) -> Self {
        d.0
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} min", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScaleLevel {
    Nano,
    Micro,
    Mini,
    Macro,
}

impl ScaleLevel {
    pub const ALL: [ScaleLevel; 4] = [Self::Nano, Self::Micro, Self::Mini, Self::Macro];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Nano => "nano",
            Self::Micro => "micro",
            Self::Mini => "mini",
            Self::Macro => "macro",
        }
    }
}

impl FromStr for ScaleLevel {
    type Err = MetaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nano" => Ok(Self::Nano),
            "micro" => Ok(Self::Micro),
            "mini" => Ok(Self::Mini),
            "macro" => Ok(Self::Macro),
            _ => Err(MetaError::UnknownScale(s.to_string())),
        }
    }
}

impl fmt::Display for ScaleLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ScaleLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ScaleLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Expected study effort in hours per week, as a closed range.
///
/// Bounds are checked by `validate_meta` rather than at construction so that
/// malformed records can still be loaded and reported on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkloadRange {
    pub min_hours_per_week: f64,
    pub max_hours_per_week: f64,
}

impl WorkloadRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self {
            min_hours_per_week: min,
            max_hours_per_week: max,
        }
    }

    pub fn single(hours: f64) -> Self {
        Self::new(hours, hours)
    }

    pub fn is_valid(&self) -> bool {
        self.min_hours_per_week.is_finite()
            && self.max_hours_per_week.is_finite()
            && self.min_hours_per_week > 0.0
            && self.min_hours_per_week <= self.max_hours_per_week
    }

    pub fn midpoint(&self) -> f64 {
        (self.min_hours_per_week + self.max_hours_per_week) / 2.0
    }
}

impl<'de> Deserialize<'de> for WorkloadRange {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Single(f64),
            Pair([f64; 2]),
            Range {
                min_hours_per_week: f64,
                max_hours_per_week: f64,
            },
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Single(v) => Self::single(v),
            Repr::Pair([lo, hi]) => Self::new(lo, hi),
            Repr::Range {
                min_hours_per_week,
                max_hours_per_week,
            } => Self::new(min_hours_per_week, max_hours_per_week),
        })
    }
}

/// Star votes kept as `(count, sum)` so the mean stays exact and two
/// aggregates can be merged by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatingAggregate {
    pub count: u64,
    pub sum: u64,
}

impl RatingAggregate {
    pub const MIN_STARS: u8 = 1;
    pub const MAX_STARS: u8 = 5;

    pub fn from_votes(votes: &[u8]) -> Self {
        let mut agg = Self::default();
        for &v in votes {
            agg.add_vote(v);
        }
        agg
    }

    /// Adds one vote. The caller checks the range; see `is_valid_stars`.
    pub fn add_vote(&mut self, stars: u8) {
        self.count += 1;
        self.sum += u64::from(stars);
    }

    pub fn is_valid_stars(stars: i64) -> bool {
        (i64::from(Self::MIN_STARS)..=i64::from(Self::MAX_STARS)).contains(&stars)
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum as f64 / self.count as f64)
    }

    /// Whether `sum` is achievable by `count` votes in [1, 5].
    pub fn is_consistent(&self) -> bool {
        self.sum >= self.count * u64::from(Self::MIN_STARS)
            && self.sum <= self.count * u64::from(Self::MAX_STARS)
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            count: self.count + other.count,
            sum: self.sum + other.sum,
        }
    }

    /// Exact comparison of means; unrated compares below every rated value.
    pub fn cmp_mean(&self, other: &Self) -> Ordering {
        match (self.count, other.count) {
            (0, 0) => Ordering::Equal,
            (0, _) => Ordering::Less,
            (_, 0) => Ordering::Greater,
            _ => (u128::from(self.sum) * u128::from(other.count))
                .cmp(&(u128::from(other.sum) * u128::from(self.count))),
        }
    }
}

/// Price in currency units. No currency logic is attached.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Price(pub Decimal);

impl Price {
    pub const ZERO: Price = Price(Decimal::ZERO);

    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }
}

impl std::ops::Add for Price {
    type Output = Price;

    fn add(self, rhs: Self) -> Self::Output {
        Price(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Price {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Price::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.normalize())
    }
}

impl FromStr for Price {
    type Err = rust_decimal::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Decimal::from_str(s.trim()).map(Price)
    }
}

impl Serialize for Price {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let normalized = self.0.normalize();
        if normalized.scale() == 0 {
            if let Ok(i) = i64::try_from(normalized) {
                return serializer.serialize_i64(i);
            }
        }
        // Prices are short decimals, so the shortest float form prints the
        // same digits back.
        let f: f64 = normalized
            .to_string()
            .parse()
            .map_err(serde::ser::Error::custom)?;
        serializer.serialize_f64(f)
    }
}

impl<'de> Deserialize<'de> for Price {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        let text = match &value {
            Value::Number(n) => n.to_string(),
            Value::String(s) => s.clone(),
            other => {
                return Err(serde::de::Error::custom(format!(
                    "price must be a number, got {other}"
                )))
            }
        };
        let parsed = Decimal::from_str(&text)
            .or_else(|_| Decimal::from_scientific(&text))
            .map_err(serde::de::Error::custom)?;
        Ok(Price(parsed.normalize()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    /// Static web content wrapped with meta-information.
    #[default]
    Passive,
    /// Backed by an executable workflow (a virtual lab).
    Active,
}

/// The standardized meta-information record of a module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleMeta {
    pub id: ModuleId,
    pub title: String,
    /// Obligatory prerequisites (input socket).
    #[serde(default)]
    pub previous: Vec<ModuleId>,
    /// Suggested continuations (output socket).
    #[serde(default)]
    pub next: Vec<ModuleId>,
    #[serde(default)]
    pub alternatives: Vec<ModuleId>,
    /// Hierarchical paths such as `Physics:Computational Physics`.
    #[serde(default)]
    pub categories: Vec<String>,
    pub complexity: u8,
    pub scale: ScaleLevel,
    pub duration: Duration,
    pub workload: WorkloadRange,
    #[serde(default)]
    pub exercises: u32,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub languages: Vec<String>,
    #[serde(default)]
    pub rating: RatingAggregate,
    #[serde(default)]
    pub certificate: bool,
    #[serde(default)]
    pub price: Price,
    #[serde(default)]
    pub kind: ModuleKind,
    /// Fields this version does not know about; kept so they survive an
    /// import/export cycle.
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl ModuleMeta {
    /// A minimal record with defaults for every optional field.
    pub fn new(
        id: ModuleId,
        title: impl Into<String>,
        scale: ScaleLevel,
        duration: Duration,
        workload: WorkloadRange,
    ) -> Self {
        Self {
            id,
            title: title.into(),
            previous: Vec::new(),
            next: Vec::new(),
            alternatives: Vec::new(),
            categories: Vec::new(),
            complexity: 1,
            scale,
            duration,
            workload,
            exercises: 0,
            keywords: Vec::new(),
            languages: vec!["English".to_string()],
            rating: RatingAggregate::default(),
            certificate: false,
            price: Price::ZERO,
            kind: ModuleKind::Passive,
            extra: BTreeMap::new(),
        }
    }

    /// Every id mentioned in the sockets and alternatives, in declaration order.
    pub fn references(&self) -> impl Iterator<Item = &ModuleId> {
        self.previous
            .iter()
            .chain(self.next.iter())
            .chain(self.alternatives.iter())
    }

    pub fn has_language(&self, language: &str) -> bool {
        self.languages
            .iter()
            .any(|l| l.trim().eq_ignore_ascii_case(language.trim()))
    }

    /// Keywords plus the words of the title, used for keyword search.
    pub fn search_tokens(&self) -> impl Iterator<Item = &str> {
        self.keywords
            .iter()
            .map(|k| k.trim())
            .chain(
                self.title
                    .split(|c: char| !(c.is_alphanumeric() || c == '-'))
                    .filter(|t| !t.is_empty()),
            )
    }

    /// Expected effort in hours: duration in weeks times the workload midpoint.
    pub fn expected_hours(&self) -> f64 {
        self.duration.weeks() * self.workload.midpoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slug_validation() {
        assert!(ModuleId::new("md-sim-1").is_ok());
        assert!(ModuleId::new("0abc").is_ok());
        assert!(ModuleId::new("").is_err());
        assert!(ModuleId::new("-abc").is_err());
        assert!(ModuleId::new("Abc").is_err());
        assert!(ModuleId::new("a b").is_err());
        assert!(ModuleId::new("a".repeat(128)).is_ok());
        assert!(ModuleId::new("a".repeat(129)).is_err());
    }

    #[test]
    fn slug_from_title() {
        let id = ModuleId::from_title(
            "MD Simulation of Defect Evolution in Al-Cu Alloys with Nanoinclusions",
        )
        .unwrap();
        assert_eq!(
            id.as_str(),
            "md-simulation-of-defect-evolution-in-al-cu-alloys-with-nanoinclusions"
        );
        assert_eq!(
            ModuleId::from_title("MD Simulation of Non-metal Solids").unwrap().as_str(),
            "md-simulation-of-non-metal-solids"
        );
        assert_eq!(
            ModuleId::from_title("  Shell: Scripts, (basics)! ").unwrap().as_str(),
            "shell-scripts-basics"
        );
        assert!(ModuleId::from_title("!!!").is_none());
    }

    #[test]
    fn duration_conversions() {
        assert_eq!(Duration::from_weeks(2).unwrap().minutes(), 20_160);
        assert_eq!(Duration::from_months(6).unwrap().minutes(), 259_200);
        assert_eq!(Duration::from_days(14).unwrap().minutes(), 20_160);
        assert_eq!(Duration::from_hours(8).unwrap().minutes(), 480);
        assert!(Duration::from_minutes(0).is_err());
        assert_eq!(Duration::from_weeks(2).unwrap().weeks(), 2.0);
    }

    #[test]
    fn scale_parse_is_case_insensitive() {
        assert_eq!("Mini".parse::<ScaleLevel>().unwrap(), ScaleLevel::Mini);
        assert_eq!(" MACRO".parse::<ScaleLevel>().unwrap(), ScaleLevel::Macro);
        assert!("huge".parse::<ScaleLevel>().is_err());
        assert!(ScaleLevel::Nano < ScaleLevel::Micro);
        assert!(ScaleLevel::Mini < ScaleLevel::Macro);
    }

    #[test]
    fn workload_accepts_shorthand_forms() {
        let single: WorkloadRange = serde_json::from_str("6").unwrap();
        assert_eq!(single, WorkloadRange::single(6.0));
        let pair: WorkloadRange = serde_json::from_str("[8, 10]").unwrap();
        assert_eq!(pair, WorkloadRange::new(8.0, 10.0));
        let obj: WorkloadRange =
            serde_json::from_str(r#"{"min_hours_per_week":1.5,"max_hours_per_week":2}"#).unwrap();
        assert_eq!(obj, WorkloadRange::new(1.5, 2.0));
    }

    #[test]
    fn rating_mean_and_ordering() {
        let r = RatingAggregate::from_votes(&[3, 5]);
        assert_eq!(r.mean(), Some(4.0));
        assert_eq!(RatingAggregate::default().mean(), None);
        let a = RatingAggregate::from_votes(&[4, 4, 5]);
        let b = RatingAggregate::from_votes(&[5, 4]);
        assert_eq!(a.cmp_mean(&b), Ordering::Less);
        assert_eq!(RatingAggregate::default().cmp_mean(&a), Ordering::Less);
        assert!(!RatingAggregate { count: 2, sum: 11 }.is_consistent());
        assert!(!RatingAggregate { count: 2, sum: 1 }.is_consistent());
    }

    #[test]
    fn price_serializes_without_trailing_zeros() {
        let p: Price = "12.50".parse().unwrap();
        assert_eq!(crate::canonical::to_string(&p).unwrap(), "12.5");
        let zero: Price = "0.00".parse().unwrap();
        assert_eq!(crate::canonical::to_string(&zero).unwrap(), "0");
        let back: Price = serde_json::from_str("12.5").unwrap();
        assert_eq!(back, p);
        let back: Price = serde_json::from_str("\"19.99\"").unwrap();
        assert_eq!(back.to_string(), "19.99");
    }
}
