use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use coursegate::curriculum::{
    self, CourseAggregate, CourseTrack, PrereqGraph, TrackConstraints,
};
use coursegate::executor::{
    plan_execution, AdapterRegistry, ExecutionRecord, Executor, ExecutorConfig, Policy, Resource,
    RunInputs, RunSnapshot,
};
use coursegate::registry::{
    ImportReport, ModuleId, ModuleMeta, RatingAggregate, Registry, SearchQuery,
};
use coursegate::workflow::{validate_workflow, Endpoint, Workflow, WorkflowId};
use coursegate::{fixtures, ValidationReport};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ServiceError};

/// Repository archive file inside the data directory.
pub const REPOSITORY_FILE: &str = "repository.json";
/// Directory of finished run records inside the data directory.
pub const RUNS_DIR: &str = "runs";

/// Body of track endpoints: a bare track, or a track with constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrackRequest {
    Wrapped {
        track: CourseTrack,
        #[serde(default)]
        constraints: Option<TrackConstraints>,
    },
    Bare(CourseTrack),
}

impl TrackRequest {
    pub fn into_parts(self) -> (CourseTrack, Option<TrackConstraints>) {
        match self {
            Self::Wrapped { track, constraints } => (track, constraints),
            Self::Bare(track) => (track, None),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub target: String,
    #[serde(default)]
    pub constraints: Option<TrackConstraints>,
}

/// Bytes for one unlinked in-port, given as UTF-8 text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInput {
    pub node: String,
    pub port: String,
    pub content: String,
}

/// A run submission. Exactly one of `workflow` and `workflow_id` is set.
/// The pool defaults to the shipped two-resource pool, the policy to
/// round robin and the seed to 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    #[serde(default)]
    pub workflow: Option<Workflow>,
    #[serde(default)]
    pub workflow_id: Option<String>,
    #[serde(default)]
    pub pool: Option<Vec<Resource>>,
    #[serde(default)]
    pub policy: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub inputs: Vec<RunInput>,
}

/// Registry, executor and their on-disk home. Every registry mutation is
/// written through to `repository.json` before it is acknowledged.
pub struct Store {
    registry: Registry,
    executor: Executor,
    data_dir: PathBuf,
    // Held across mutate-then-persist so the file always reflects the latest state.
    persist: Mutex<()>,
}

impl Store {
    pub fn open(data_dir: impl Into<PathBuf>, worker_limit: Option<usize>) -> Result<Self, ServiceError> {
        let data_dir = data_dir.into();
        ensure_writable(&data_dir)?;
        let registry = Registry::new();
        let repo = data_dir.join(REPOSITORY_FILE);
        if repo.exists() {
            let bytes = fs::read(&repo)?;
            registry
                .import_repository(&bytes)
                .map_err(ServiceError::CorruptRepository)?;
        }
        let mut config = ExecutorConfig {
            runs_dir: Some(data_dir.join(RUNS_DIR)),
            ..ExecutorConfig::default()
        };
        if let Some(n) = worker_limit {
            config.worker_limit = n;
        }
        let executor = Executor::with_config(AdapterRegistry::with_builtins(), config);
        executor.load_runs()?;
        Ok(Self {
            registry,
            executor,
            data_dir,
            persist: Mutex::new(()),
        })
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn executor(&self) -> &Executor {
        &self.executor
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    /// Writes the current registry to disk.
    pub fn flush(&self) -> Result<(), ServiceError> {
        let _guard = self.persist.lock();
        self.write_repository()
    }

    fn write_repository(&self) -> Result<(), ServiceError> {
        let bytes = self.registry.export_repository();
        let path = self.data_dir.join(REPOSITORY_FILE);
        let tmp = self.data_dir.join(format!("{REPOSITORY_FILE}.tmp"));
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        };
        write().map_err(|e| ServiceError::Storage(format!("{}: {e}", path.display())))
    }

    fn mutate<T>(&self, f: impl FnOnce(&Registry) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let _guard = self.persist.lock();
        let out = f(&self.registry)?;
        self.write_repository()?;
        Ok(out)
    }

    // Registry.

    pub fn list_modules(&self) -> Vec<ModuleMeta> {
        self.registry.modules()
    }

    pub fn get_module(&self, id: &str) -> Result<ModuleMeta, ApiError> {
        self.registry
            .get(id)
            .ok_or_else(|| ApiError::new("UNKNOWN_MODULE", format!("unknown module {id}")))
    }

    pub fn register_module(&self, meta: ModuleMeta) -> Result<ModuleId, ApiError> {
        self.mutate(|r| Ok(r.register_module(meta)?))
    }

    pub fn validate_module(&self, meta: &ModuleMeta) -> ValidationReport {
        self.registry.validate(meta)
    }

    pub fn rate_module(&self, id: &str, stars: i64) -> Result<RatingAggregate, ApiError> {
        self.mutate(|r| Ok(r.rate_module(id, stars)?))
    }

    pub fn search_modules(&self, query: &SearchQuery) -> Vec<ModuleMeta> {
        self.registry.search_modules(query)
    }

    pub fn import_repository(&self, bytes: &[u8]) -> Result<ImportReport, ApiError> {
        self.mutate(|r| Ok(r.import_repository(bytes)?))
    }

    pub fn export_repository(&self) -> Vec<u8> {
        self.registry.export_repository()
    }

    // Curriculum. Graphs are rebuilt from the current registry per call.

    pub fn graph(&self) -> Result<PrereqGraph, ApiError> {
        Ok(PrereqGraph::from_registry(&self.registry)?)
    }

    pub fn check_track(
        &self,
        track: &CourseTrack,
        constraints: Option<&TrackConstraints>,
    ) -> Result<ValidationReport, ApiError> {
        Ok(curriculum::check_track(track, &self.graph()?, constraints)?)
    }

    pub fn plan_track(&self, req: &PlanRequest) -> Result<CourseTrack, ApiError> {
        Ok(curriculum::plan_track(&req.target, &self.graph()?, req.constraints.as_ref())?)
    }

    pub fn aggregate_track(&self, track: &CourseTrack) -> Result<CourseAggregate, ApiError> {
        Ok(curriculum::aggregate(track, &self.registry)?)
    }

    // Workflows.

    pub fn list_workflows(&self) -> Vec<Workflow> {
        self.registry.workflows()
    }

    pub fn add_workflow(&self, wf: Workflow) -> Result<WorkflowId, ApiError> {
        self.mutate(|r| Ok(r.add_workflow(wf)?))
    }

    pub fn get_workflow(&self, id: &str) -> Result<Workflow, ApiError> {
        self.registry
            .get_workflow(id)
            .ok_or_else(|| ApiError::new("UNKNOWN_WORKFLOW", format!("unknown workflow {id}")))
    }

    /// Validation against the tools this executor can actually run.
    pub fn validate_workflow(&self, wf: &Workflow) -> ValidationReport {
        validate_workflow(wf, self.executor.adapters())
    }

    // Runs.

    pub fn submit_run(&self, req: RunRequest) -> Result<RunSnapshot, ApiError> {
        let wf = match (req.workflow, req.workflow_id) {
            (Some(wf), None) => wf,
            (None, Some(id)) => self.get_workflow(&id)?,
            _ => {
                return Err(ApiError::bad_request(
                    "exactly one of workflow and workflow_id is required",
                ))
            }
        };
        let pool = req.pool.unwrap_or_else(fixtures::pool);
        let policy: Policy = req.policy.as_deref().unwrap_or("round_robin").parse()?;
        let plan = plan_execution(&wf, &pool, policy)?;
        let mut inputs = RunInputs::new();
        for input in req.inputs {
            inputs.insert(Endpoint::new(input.node, input.port), input.content.into_bytes());
        }
        let run_id = self.executor.submit(&wf, &plan, inputs, req.seed)?;
        Ok(self.executor.run_status(&run_id)?)
    }

    pub fn run_status(&self, run_id: &str) -> Result<RunSnapshot, ApiError> {
        Ok(self.executor.run_status(run_id)?)
    }

    pub fn cancel_run(&self, run_id: &str) -> Result<RunSnapshot, ApiError> {
        self.executor.cancel(run_id)?;
        Ok(self.executor.run_status(run_id)?)
    }

    pub fn wait_run(&self, run_id: &str) -> Result<ExecutionRecord, ApiError> {
        Ok(self.executor.wait(run_id)?)
    }

    /// Artifact bytes and content id of one output port.
    pub fn artifact(&self, run_id: &str, node: &str, port: &str) -> Result<(String, Vec<u8>), ApiError> {
        let record = self.executor.record(run_id)?;
        let artifact = record.artifact(node, port).ok_or_else(|| {
            ApiError::not_found(format!("run {run_id} has no artifact at {node}.{port}"))
        })?;
        Ok((artifact.id.clone(), artifact.bytes.clone()))
    }

    pub fn run_ids(&self) -> Vec<String> {
        self.executor.run_ids()
    }
}

fn ensure_writable(dir: &Path) -> Result<(), ServiceError> {
    let unwritable = |e: std::io::Error| ServiceError::DataDirUnwritable {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(unwritable)?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(unwritable)?;
    fs::remove_file(&probe).map_err(unwritable)?;
    Ok(())
}

/// Parses `key=value` search parameters. `keyword` may repeat and may hold
/// comma-separated words.
pub fn search_query(pairs: &[(String, String)]) -> Result<SearchQuery, ApiError> {
    let mut q = SearchQuery::default();
    for (key, value) in pairs {
        match key.as_str() {
            "keyword" | "keywords" => q.keywords.extend(
                value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from),
            ),
            "category" | "category_prefix" => q.category_prefix = Some(value.clone()),
            "scale" => {
                q.scale = Some(
                    value
                        .parse()
                        .map_err(|_| ApiError::bad_request(format!("unknown scale {value:?}")))?,
                )
            }
            "language" => q.language = Some(value.clone()),
            "max_complexity" => {
                q.max_complexity = Some(value.parse().map_err(|_| {
                    ApiError::bad_request(format!("max_complexity must be 1..5, got {value:?}"))
                })?)
            }
            other => return Err(ApiError::bad_request(format!("unknown search parameter {other:?}"))),
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn search_parameters_parse() {
        let pairs = vec![
            ("keyword".to_string(), "MD, metal".to_string()),
            ("scale".to_string(), "mini".to_string()),
            ("max_complexity".to_string(), "4".to_string()),
        ];
        let q = search_query(&pairs).unwrap();
        assert_eq!(q.keywords, ["MD", "metal"]);
        assert_eq!(q.max_complexity, Some(4));
        assert!(search_query(&[("bogus".into(), "x".into())]).is_err());
    }

    #[test]
    fn track_request_accepts_bare_and_wrapped() {
        let bare: TrackRequest = serde_json::from_str(fixtures::TRACK_JSON).unwrap();
        assert!(matches!(bare, TrackRequest::Bare(_)));
        let wrapped = format!(r#"{{"track":{},"constraints":{{"max_complexity":3}}}}"#, fixtures::TRACK_JSON);
        let (track, constraints) = serde_json::from_str::<TrackRequest>(&wrapped).unwrap().into_parts();
        assert_eq!(track.entries.len(), 2);
        assert_eq!(constraints.unwrap().max_complexity, Some(3));
    }

    #[test]
    fn mutations_are_written_through() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), Some(1)).unwrap();
        store.register_module(fixtures::table1_module()).unwrap();
        let reopened = Store::open(dir.path(), Some(1)).unwrap();
        assert_eq!(reopened.export_repository(), store.export_repository());
    }
}
