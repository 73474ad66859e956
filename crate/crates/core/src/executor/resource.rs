use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ExecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Pc,
    Cluster,
    ServiceGrid,
    DesktopGrid,
    Cloud,
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pc => "pc",
            Self::Cluster => "cluster",
            Self::ServiceGrid => "service_grid",
            Self::DesktopGrid => "desktop_grid",
            Self::Cloud => "cloud",
        })
    }
}

/// A simulated execution target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub id: String,
    pub kind: ResourceKind,
    /// Maximum number of crates running at once.
    pub slots: u32,
    /// Multiplier on nominal task cost; below 1 is faster.
    pub speed_factor: f64,
}

impl Resource {
    pub fn new(id: impl Into<String>, kind: ResourceKind, slots: u32, speed_factor: f64) -> Self {
        Self {
            id: id.into(),
            kind,
            slots,
            speed_factor,
        }
    }
}

/// Reject empty pools, repeated ids, zero slots and non-positive speeds.
pub fn validate_pool(pool: &[Resource]) -> Result<(), ExecError> {
    if pool.is_empty() {
        return Err(ExecError::EmptyPool);
    }
    let mut ids = BTreeSet::new();
    for r in pool {
        if !ids.insert(r.id.as_str()) {
            return Err(ExecError::InvalidResource(format!("duplicate resource id {}", r.id)));
        }
        if r.slots == 0 {
            return Err(ExecError::InvalidResource(format!("{} has zero slots", r.id)));
        }
        if !(r.speed_factor.is_finite() && r.speed_factor > 0.0) {
            return Err(ExecError::InvalidResource(format!(
                "{} has speed factor {}; it must be positive",
                r.id, r.speed_factor
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_json_shape() {
        let pool: Vec<Resource> = serde_json::from_str(
            r#"[{"id":"grid-1","kind":"desktop_grid","slots":8,"speed_factor":2.5}]"#,
        )
        .unwrap();
        assert_eq!(pool[0].kind, ResourceKind::DesktopGrid);
        validate_pool(&pool).unwrap();
    }

    #[test]
    fn bad_pools() {
        assert_eq!(validate_pool(&[]).unwrap_err().code(), "EMPTY_POOL");
        let r = Resource::new("a", ResourceKind::Pc, 1, 1.0);
        assert_eq!(
            validate_pool(&[r.clone(), r.clone()]).unwrap_err().code(),
            "INVALID_RESOURCE"
        );
        let mut zero = r.clone();
        zero.slots = 0;
        assert!(validate_pool(&[zero]).is_err());
        let mut slow = r;
        slow.speed_factor = 0.0;
        assert!(validate_pool(&[slow]).is_err());
    }
}
