//! Module registry: storage, validation, search, rating and repository
//! exchange for course modules and their workflows.
//!
//! A [`Registry`] is meant to be shared. Reads run concurrently; every
//! mutation takes the write lock, so callers always observe their own writes.

mod archive;
pub mod meta;
pub mod validate;

use std::collections::{BTreeMap, BTreeSet};

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use archive::{ImportReport, RepositoryArchive, FORMAT_VERSION};
pub use meta::{
    Duration, MetaError, ModuleId, ModuleKind, ModuleMeta, Price, RatingAggregate, ScaleLevel,
    WorkloadRange,
};
pub use validate::validate_meta;

use crate::report::ValidationReport;
use crate::workflow::{self, Workflow, WorkflowId};

/// Timestamp used until a registry adopts one from an imported archive.
pub const DEFAULT_CREATED_AT: &str = "1970-01-01T00:00:00Z";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("module {0} is already registered")]
    DuplicateId(ModuleId),
    #[error("validation failed:\n{0}")]
    ValidationFailed(ValidationReport),
    #[error("unknown module {0}")]
    UnknownModule(String),
    #[error("stars must be between 1 and 5, got {0}")]
    StarsOutOfRange(i64),
    #[error("malformed archive: {0}")]
    MalformedArchive(String),
    #[error("unsupported archive format version {0:?}")]
    UnsupportedVersion(String),
    #[error("workflow {0} is already registered")]
    DuplicateWorkflow(WorkflowId),
    #[error("unknown workflow {0}")]
    UnknownWorkflow(String),
}

impl RegistryError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::DuplicateId(_) => "DUPLICATE_ID",
            Self::ValidationFailed(_) => "VALIDATION_FAILED",
            Self::UnknownModule(_) => "UNKNOWN_MODULE",
            Self::StarsOutOfRange(_) => "STARS_OUT_OF_RANGE",
            Self::MalformedArchive(_) => "MALFORMED_ARCHIVE",
            Self::UnsupportedVersion(_) => "UNSUPPORTED_VERSION",
            Self::DuplicateWorkflow(_) => "DUPLICATE_WORKFLOW",
            Self::UnknownWorkflow(_) => "UNKNOWN_WORKFLOW",
        }
    }
}

/// Conjunctive search filters. Absent fields do not constrain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    /// Every keyword must match a module keyword or title word (case-insensitive).
    #[serde(default)]
    pub keywords: Vec<String>,
    /// Segment-wise prefix of a category path, e.g. `Physics`.
    #[serde(default)]
    pub category_prefix: Option<String>,
    #[serde(default)]
    pub scale: Option<ScaleLevel>,
    #[serde(default)]
    pub language: Option<String>,
    #[serde(default)]
    pub max_complexity: Option<u8>,
}

impl SearchQuery {
    pub fn matches(&self, meta: &ModuleMeta) -> bool {
        let keywords_ok = self.keywords.iter().all(|kw| {
            let kw = kw.trim();
            meta.search_tokens().any(|t| t.eq_ignore_ascii_case(kw))
        });
        let category_ok = self
            .category_prefix
            .as_deref()
            .is_none_or(|prefix| meta.categories.iter().any(|c| category_has_prefix(c, prefix)));
        let scale_ok = self.scale.is_none_or(|s| meta.scale == s);
        let language_ok = self
            .language
            .as_deref()
            .is_none_or(|lang| meta.has_language(lang));
        let complexity_ok = self.max_complexity.is_none_or(|max| meta.complexity <= max);
        keywords_ok && category_ok && scale_ok && language_ok && complexity_ok
    }
}

fn category_has_prefix(category: &str, prefix: &str) -> bool {
    let mut path = category.split(':').map(str::trim);
    prefix
        .split(':')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .all(|seg| path.next().is_some_and(|p| p.eq_ignore_ascii_case(seg)))
}

#[derive(Debug, Clone)]
struct State {
    created_at: String,
    modules: BTreeMap<ModuleId, ModuleMeta>,
    workflows: BTreeMap<WorkflowId, Workflow>,
}

impl Default for State {
    fn default() -> Self {
        Self {
            created_at: DEFAULT_CREATED_AT.to_string(),
            modules: BTreeMap::new(),
            workflows: BTreeMap::new(),
        }
    }
}

impl State {
    fn ids_with(&self, extra: &ModuleId) -> BTreeSet<ModuleId> {
        self.modules
            .keys()
            .cloned()
            .chain(std::iter::once(extra.clone()))
            .collect()
    }
}

#[derive(Debug, Default)]
pub struct Registry {
    state: RwLock<State>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// A registry whose archives carry the given creation timestamp.
    pub fn with_created_at(created_at: impl Into<String>) -> Self {
        let registry = Self::default();
        registry.state.write().created_at = created_at.into();
        registry
    }

    pub fn created_at(&self) -> String {
        self.state.read().created_at.clone()
    }

    pub fn len(&self) -> usize {
        self.state.read().modules.len()
    }

    pub fn is_empty(&self) -> bool {
        let state = self.state.read();
        state.modules.is_empty() && state.workflows.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<ModuleId> {
        self.state.read().modules.keys().cloned().collect()
    }

    pub fn get(&self, id: &str) -> Option<ModuleMeta> {
        self.state.read().modules.get(id).cloned()
    }

    /// All modules ordered by id.
    pub fn modules(&self) -> Vec<ModuleMeta> {
        self.state.read().modules.values().cloned().collect()
    }

    pub fn register_module(&self, meta: ModuleMeta) -> Result<ModuleId, RegistryError> {
        let mut state = self.state.write();
        if state.modules.contains_key(&meta.id) {
            return Err(RegistryError::DuplicateId(meta.id));
        }
        let report = validate_meta(&meta, &state.ids_with(&meta.id));
        if report.has_errors() {
            return Err(RegistryError::ValidationFailed(report));
        }
        let id = meta.id.clone();
        state.modules.insert(id.clone(), meta);
        Ok(id)
    }

    /// Replace an existing record. The only way to re-register an id.
    pub fn update_module(&self, meta: ModuleMeta) -> Result<(), RegistryError> {
        let mut state = self.state.write();
        if !state.modules.contains_key(&meta.id) {
            return Err(RegistryError::UnknownModule(meta.id.to_string()));
        }
        let report = validate_meta(&meta, &state.ids_with(&meta.id));
        if report.has_errors() {
            return Err(RegistryError::ValidationFailed(report));
        }
        state.modules.insert(meta.id.clone(), meta);
        Ok(())
    }

    /// Validate against the ids currently registered (plus the record's own).
    pub fn validate(&self, meta: &ModuleMeta) -> ValidationReport {
        let state = self.state.read();
        validate_meta(meta, &state.ids_with(&meta.id))
    }

    /// Modules matching every filter, best rated first, unrated last, then by id.
    pub fn search_modules(&self, query: &SearchQuery) -> Vec<ModuleMeta> {
        let state = self.state.read();
        let mut hits: Vec<ModuleMeta> = state
            .modules
            .values()
            .filter(|m| query.matches(m))
            .cloned()
            .collect();
        hits.sort_by(|a, b| b.rating.cmp_mean(&a.rating).then_with(|| a.id.cmp(&b.id)));
        hits
    }

    pub fn rate_module(&self, id: &str, stars: i64) -> Result<RatingAggregate, RegistryError> {
        let mut state = self.state.write();
        let meta = state
            .modules
            .get_mut(id)
            .ok_or_else(|| RegistryError::UnknownModule(id.to_string()))?;
        if !RatingAggregate::is_valid_stars(stars) {
            return Err(RegistryError::StarsOutOfRange(stars));
        }
        meta.rating.add_vote(stars as u8);
        Ok(meta.rating)
    }

    pub fn add_workflow(&self, wf: Workflow) -> Result<WorkflowId, RegistryError> {
        let mut state = self.state.write();
        if state.workflows.contains_key(&wf.id) {
            return Err(RegistryError::DuplicateWorkflow(wf.id));
        }
        let report = workflow::validate_workflow(&wf, &workflow::builtin_tools());
        if report.has_errors() {
            return Err(RegistryError::ValidationFailed(report));
        }
        let id = wf.id.clone();
        state.workflows.insert(id.clone(), wf.canonicalized());
        Ok(id)
    }

    pub fn get_workflow(&self, id: &str) -> Option<Workflow> {
        self.state.read().workflows.get(id).cloned()
    }

    pub fn workflows(&self) -> Vec<Workflow> {
        self.state.read().workflows.values().cloned().collect()
    }

    /// Snapshot the registry as an archive value.
    pub fn to_archive(&self) -> RepositoryArchive {
        let state = self.state.read();
        RepositoryArchive {
            format_version: FORMAT_VERSION.to_string(),
            created_at: state.created_at.clone(),
            modules: state.modules.values().cloned().collect(),
            workflows: state.workflows.values().cloned().collect(),
        }
    }

    /// Canonical archive bytes. Equal registry contents give equal bytes.
    pub fn export_repository(&self) -> Vec<u8> {
        self.to_archive().to_canonical_bytes()
    }

    pub fn import_repository(&self, bytes: &[u8]) -> Result<ImportReport, RegistryError> {
        let archive = RepositoryArchive::from_bytes(bytes)?;
        Ok(self.import_archive(archive))
    }

    /// Merge an archive. Colliding ids are skipped, never overwritten.
    pub fn import_archive(&self, archive: RepositoryArchive) -> ImportReport {
        let mut state = self.state.write();
        let mut report = ImportReport::default();
        if state.modules.is_empty() && state.workflows.is_empty() {
            state.created_at = archive.created_at.clone();
        }

        let mut known: BTreeSet<ModuleId> = state.modules.keys().cloned().collect();
        known.extend(archive.modules.iter().map(|m| m.id.clone()));

        let mut external = BTreeSet::new();
        for meta in archive.modules {
            if state.modules.contains_key(&meta.id) {
                report
                    .skipped
                    .push((meta.id.to_string(), "DUPLICATE_ID".to_string()));
                continue;
            }
            let findings = validate_meta(&meta, &known);
            if findings.has_errors() {
                report
                    .skipped
                    .push((meta.id.to_string(), "VALIDATION_FAILED".to_string()));
                continue;
            }
            external.extend(meta.references().filter(|r| !known.contains(*r)).cloned());
            state.modules.insert(meta.id.clone(), meta);
            report.added += 1;
        }
        report.external_refs = external.into_iter().collect();

        let tools = workflow::builtin_tools();
        for wf in archive.workflows {
            if state.workflows.contains_key(&wf.id) {
                report
                    .skipped_workflows
                    .push((wf.id.to_string(), "DUPLICATE_WORKFLOW".to_string()));
                continue;
            }
            if workflow::validate_workflow(&wf, &tools).has_errors() {
                report
                    .skipped_workflows
                    .push((wf.id.to_string(), "VALIDATION_FAILED".to_string()));
                continue;
            }
            state.workflows.insert(wf.id.clone(), wf.canonicalized());
            report.workflows_added += 1;
        }
        report
    }
}

impl Clone for Registry {
    fn clone(&self) -> Self {
        Self {
            state: RwLock::new(self.state.read().clone()),
        }
    }
}
