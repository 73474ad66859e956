use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical;
use crate::workflow::Workflow;

use super::meta::{ModuleId, ModuleMeta};
use super::RegistryError;

pub const FORMAT_VERSION: &str = "1.0";

/// Interchange form of a repository: modules plus workflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepositoryArchive {
    pub format_version: String,
    pub created_at: String,
    pub modules: Vec<ModuleMeta>,
    pub workflows: Vec<Workflow>,
}

impl RepositoryArchive {
    pub fn empty(created_at: impl Into<String>) -> Self {
        Self {
            format_version: FORMAT_VERSION.to_string(),
            created_at: created_at.into(),
            modules: Vec::new(),
            workflows: Vec::new(),
        }
    }

    /// Canonical bytes: modules and workflows sorted by id, workflow
    /// internals normalised, sorted keys, no whitespace.
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut sorted = self.clone();
        sorted.modules.sort_by(|a, b| a.id.cmp(&b.id));
        sorted.workflows = sorted
            .workflows
            .into_iter()
            .map(|wf| wf.canonicalized())
            .collect();
        sorted.workflows.sort_by(|a, b| a.id.cmp(&b.id));
        canonical::to_vec(&sorted).expect("archive values always serialize")
    }

    /// Parse archive bytes, checking the version before the body.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, RegistryError> {
        let value: Value = serde_json::from_slice(bytes)
            .map_err(|e| RegistryError::MalformedArchive(e.to_string()))?;
        let version = value
            .get("format_version")
            .ok_or_else(|| RegistryError::MalformedArchive("missing format_version".into()))?;
        match version.as_str() {
            Some(FORMAT_VERSION) => {}
            Some(other) => return Err(RegistryError::UnsupportedVersion(other.to_string())),
            None => return Err(RegistryError::UnsupportedVersion(version.to_string())),
        }
        let archive: RepositoryArchive = serde_json::from_value(value)
            .map_err(|e| RegistryError::MalformedArchive(e.to_string()))?;
        if !is_utc_timestamp(&archive.created_at) {
            return Err(RegistryError::MalformedArchive(format!(
                "created_at {:?} is not a UTC timestamp",
                archive.created_at
            )));
        }
        Ok(archive)
    }
}

/// Outcome of merging an archive into a registry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportReport {
    pub added: usize,
    /// `(module id, reason code)` for every module not added.
    pub skipped: Vec<(String, String)>,
    /// Referenced ids that resolve neither in the registry nor the archive.
    pub external_refs: Vec<ModuleId>,
    pub workflows_added: usize,
    pub skipped_workflows: Vec<(String, String)>,
}

/// `YYYY-MM-DDTHH:MM:SS[.fff]Z`
fn is_utc_timestamp(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() < 20 || b[b.len() - 1] != b'Z' {
        return false;
    }
    let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    let head_ok = digits(0..4)
        && b[4] == b'-'
        && digits(5..7)
        && b[7] == b'-'
        && digits(8..10)
        && b[10] == b'T'
        && digits(11..13)
        && b[13] == b':'
        && digits(14..16)
        && b[16] == b':'
        && digits(17..19);
    let tail = &b[19..b.len() - 1];
    let tail_ok = tail.is_empty()
        || (tail[0] == b'.' && tail.len() > 1 && tail[1..].iter().all(u8::is_ascii_digit));
    head_ok && tail_ok
}
