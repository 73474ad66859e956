//! Logical-time scheduler.
//!
//! The run advances a simulated clock. At each instant the scheduler first
//! retires every node whose simulated cost has elapsed, then starts ready
//! nodes (oldest queue time first, ties in topological order) on resources
//! with a free slot. Nodes started at the same instant execute their adapters
//! on real threads, at most `worker_limit` at a time. Outputs are published at
//! the node's simulated finish time, so the event log and every artifact are
//! independent of thread timing and of `worker_limit`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use parking_lot::{Condvar, Mutex, RwLock};
use sha2::{Digest, Sha256};

use crate::workflow::{validate_workflow, Endpoint, Workflow};

use super::adapter::{AdapterError, AdapterErrorKind, AdapterRegistry, Input, Outputs, RunContext, ToolAdapter};
use super::artifact::{Artifact, Producer};
use super::plan::ExecutionPlan;
use super::record::{EventKind, ExecutionRecord, NodeEvent, NodeOutcome, NodeState, RunSnapshot, RunStatus};
use super::{ExecError, ADAPTER_FAILURE};

/// Bytes supplied for in-ports that no link feeds.
pub type RunInputs = BTreeMap<Endpoint, Vec<u8>>;

/// Simulated ticks per unit of nominal cost.
pub const TICKS_PER_UNIT: f64 = 1000.0;

#[derive(Debug, Clone)]
pub struct ExecutorConfig {
    /// Upper bound on adapters executing at once across all runs' batches.
    pub worker_limit: usize,
    /// Finished runs are written to `<runs_dir>/<run-id>/` when set.
    pub runs_dir: Option<PathBuf>,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        Self {
            worker_limit: thread::available_parallelism().map_or(1, |n| n.get()),
            runs_dir: None,
        }
    }
}

/// Seed handed to one node: a hash of the run seed and the node id.
pub fn node_seed(run_seed: u64, node: &str) -> u64 {
    let digest = Sha256::new()
        .chain_update(run_seed.to_le_bytes())
        .chain_update(node.as_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Simulated duration of `node` on a resource with `speed_factor`:
/// `steps` (or 1) times the speed factor, in ticks, at least one tick.
pub fn node_cost(wf: &Workflow, node: &str, speed_factor: f64) -> u64 {
    let steps = wf
        .node(node)
        .and_then(|n| n.parameters.get("steps"))
        .and_then(|s| s.trim().parse::<u64>().ok())
        .unwrap_or(1);
    let ticks = (steps as f64 * speed_factor * TICKS_PER_UNIT).round();
    if ticks.is_finite() && ticks >= 1.0 {
        ticks as u64
    } else {
        1
    }
}

struct RunHandle {
    record: Mutex<ExecutionRecord>,
    finished: Condvar,
    released: Mutex<bool>,
    release_cv: Condvar,
    cancel: AtomicBool,
    storage_error: Mutex<Option<String>>,
    thread: Mutex<Option<JoinHandle<()>>>,
}

impl RunHandle {
    fn new(record: ExecutionRecord, released: bool) -> Self {
        Self {
            record: Mutex::new(record),
            finished: Condvar::new(),
            released: Mutex::new(released),
            release_cv: Condvar::new(),
            cancel: AtomicBool::new(false),
            storage_error: Mutex::new(None),
            thread: Mutex::new(None),
        }
    }

    fn wake(&self) {
        let _guard = self.released.lock();
        self.release_cv.notify_all();
    }
}

/// Runs workflows in the background and keeps their records.
pub struct Executor {
    adapters: Arc<AdapterRegistry>,
    config: ExecutorConfig,
    runs: RwLock<HashMap<String, Arc<RunHandle>>>,
}

impl Executor {
    pub fn new(adapters: AdapterRegistry) -> Self {
        Self::with_config(adapters, ExecutorConfig::default())
    }

    pub fn with_config(adapters: AdapterRegistry, config: ExecutorConfig) -> Self {
        Self {
            adapters: Arc::new(adapters),
            config: ExecutorConfig {
                worker_limit: config.worker_limit.max(1),
                ..config
            },
            runs: RwLock::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &ExecutorConfig {
        &self.config
    }

    pub fn adapters(&self) -> &AdapterRegistry {
        &self.adapters
    }

    /// Reloads finished runs from `runs_dir`. Returns how many were loaded;
    /// unreadable entries are skipped.
    pub fn load_runs(&self) -> std::io::Result<usize> {
        let Some(dir) = &self.config.runs_dir else {
            return Ok(0);
        };
        if !dir.exists() {
            return Ok(0);
        }
        let mut loaded = 0;
        let mut runs = self.runs.write();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if !path.is_dir() {
                continue;
            }
            if let Ok(record) = ExecutionRecord::read_from(&path) {
                if record.status.is_final() {
                    runs.insert(record.run_id.clone(), Arc::new(RunHandle::new(record, true)));
                    loaded += 1;
                }
            }
        }
        Ok(loaded)
    }

    /// Validates the submission and starts the run. Returns immediately.
    pub fn submit(
        &self,
        wf: &Workflow,
        plan: &ExecutionPlan,
        inputs: RunInputs,
        seed: u64,
    ) -> Result<String, ExecError> {
        self.start(wf, plan, inputs, seed, true)
    }

    /// Like [`submit`](Self::submit), but nothing runs until
    /// [`release`](Self::release).
    pub fn submit_held(
        &self,
        wf: &Workflow,
        plan: &ExecutionPlan,
        inputs: RunInputs,
        seed: u64,
    ) -> Result<String, ExecError> {
        self.start(wf, plan, inputs, seed, false)
    }

    pub fn release(&self, run_id: &str) -> Result<(), ExecError> {
        let handle = self.handle(run_id)?;
        *handle.released.lock() = true;
        handle.release_cv.notify_all();
        Ok(())
    }

    pub fn run_status(&self, run_id: &str) -> Result<RunSnapshot, ExecError> {
        Ok(self.handle(run_id)?.record.lock().snapshot())
    }

    /// Point-in-time copy of the full record, including artifact bytes.
    pub fn record(&self, run_id: &str) -> Result<ExecutionRecord, ExecError> {
        Ok(self.handle(run_id)?.record.lock().clone())
    }

    /// Queued nodes will not start; running nodes finish. Idempotent, and a
    /// no-op on finished runs.
    pub fn cancel(&self, run_id: &str) -> Result<(), ExecError> {
        let handle = self.handle(run_id)?;
        handle.cancel.store(true, Ordering::SeqCst);
        handle.wake();
        Ok(())
    }

    /// Blocks until the run is final.
    pub fn wait(&self, run_id: &str) -> Result<ExecutionRecord, ExecError> {
        let handle = self.handle(run_id)?;
        {
            let mut record = handle.record.lock();
            while !record.status.is_final() {
                handle.finished.wait(&mut record);
            }
        }
        if let Some(join) = handle.thread.lock().take() {
            let _ = join.join();
        }
        if let Some(err) = handle.storage_error.lock().clone() {
            return Err(ExecError::Storage(err));
        }
        let record = handle.record.lock().clone();
        Ok(record)
    }

    /// Submit and wait.
    pub fn execute(
        &self,
        wf: &Workflow,
        plan: &ExecutionPlan,
        inputs: RunInputs,
        seed: u64,
    ) -> Result<ExecutionRecord, ExecError> {
        let id = self.submit(wf, plan, inputs, seed)?;
        self.wait(&id)
    }

    /// Known run ids, sorted.
    pub fn run_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.runs.read().keys().cloned().collect();
        ids.sort();
        ids
    }

    fn handle(&self, run_id: &str) -> Result<Arc<RunHandle>, ExecError> {
        self.runs
            .read()
            .get(run_id)
            .cloned()
            .ok_or_else(|| ExecError::UnknownRun(run_id.to_string()))
    }

    fn check_submission(&self, wf: &Workflow, plan: &ExecutionPlan, inputs: &RunInputs) -> Result<(), ExecError> {
        let report = validate_workflow(wf, self.adapters.as_ref());
        if report.has_errors() {
            return Err(ExecError::InvalidWorkflow(report));
        }
        plan.covers(wf)?;
        for node in plan.order() {
            let tool = &wf.node(node).expect("plan covers workflow").tool;
            if self.adapters.get(tool).is_none() {
                return Err(ExecError::AdapterMissing {
                    node: node.to_string(),
                    tool: tool.clone(),
                });
            }
        }
        let fed: BTreeSet<&Endpoint> = wf.links.iter().map(|l| &l.to).collect();
        for node in &wf.nodes {
            for port in &node.in_ports {
                let ep = Endpoint::new(&node.id, &port.name);
                if !fed.contains(&ep) && !inputs.contains_key(&ep) {
                    return Err(ExecError::MissingInput(ep));
                }
            }
        }
        for ep in inputs.keys() {
            let declared = wf.node(&ep.node).and_then(|n| n.in_port(&ep.port)).is_some();
            if !declared || fed.contains(ep) {
                return Err(ExecError::UnexpectedInput(ep.clone()));
            }
        }
        Ok(())
    }

    fn start(
        &self,
        wf: &Workflow,
        plan: &ExecutionPlan,
        inputs: RunInputs,
        seed: u64,
        released: bool,
    ) -> Result<String, ExecError> {
        self.check_submission(wf, plan, &inputs)?;
        let run_id = uuid::Uuid::new_v4().to_string();
        let record = ExecutionRecord {
            run_id: run_id.clone(),
            workflow_id: wf.id.clone(),
            seed,
            status: if released { RunStatus::Running } else { RunStatus::Held },
            nodes: plan
                .assignment
                .iter()
                .map(|(node, resource)| {
                    (
                        node.clone(),
                        NodeOutcome {
                            state: NodeState::Pending,
                            resource: resource.clone(),
                            error: None,
                        },
                    )
                })
                .collect(),
            events: Vec::new(),
            artifacts: Vec::new(),
        };
        let handle = Arc::new(RunHandle::new(record, released));
        self.runs.write().insert(run_id.clone(), Arc::clone(&handle));

        let job = Job {
            wf: wf.clone(),
            plan: plan.clone(),
            inputs,
            seed,
            run_id: run_id.clone(),
            adapters: Arc::clone(&self.adapters),
            worker_limit: self.config.worker_limit,
            run_dir: self.config.runs_dir.as_ref().map(|d| d.join(&run_id)),
        };
        let worker_handle = Arc::clone(&handle);
        let join = thread::Builder::new()
            .name(format!("run-{}", &run_id[..8]))
            .spawn(move || job.run(&worker_handle))
            .map_err(|e| ExecError::Storage(format!("cannot spawn run thread: {e}")))?;
        *handle.thread.lock() = Some(join);
        Ok(run_id)
    }
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("adapters", &self.adapters)
            .field("config", &self.config)
            .field("runs", &self.runs.read().len())
            .finish()
    }
}

/// Convenience: run `wf` once with the built-in adapters.
pub fn execute(
    plan: &ExecutionPlan,
    wf: &Workflow,
    inputs: RunInputs,
    seed: u64,
) -> Result<ExecutionRecord, ExecError> {
    Executor::new(AdapterRegistry::with_builtins()).execute(wf, plan, inputs, seed)
}

struct Job {
    wf: Workflow,
    plan: ExecutionPlan,
    inputs: RunInputs,
    seed: u64,
    run_id: String,
    adapters: Arc<AdapterRegistry>,
    worker_limit: usize,
    run_dir: Option<PathBuf>,
}

type NodeResult = Result<Vec<Artifact>, String>;

struct Sim<'a> {
    job: &'a Job,
    handle: &'a RunHandle,
    order: Vec<&'a str>,
    index: HashMap<&'a str, usize>,
    waiting_on: Vec<usize>,
    state: Vec<NodeState>,
    /// `(queued at, topo index)`
    ready: BTreeSet<(u64, usize)>,
    /// `(finish time, topo index)`
    running: BTreeSet<(u64, usize)>,
    results: HashMap<usize, NodeResult>,
    busy: HashMap<&'a str, u32>,
    produced: HashMap<Endpoint, Artifact>,
    now: u64,
    seq: u64,
    saw_cancel: bool,
}

impl Job {
    fn run(self, handle: &RunHandle) {
        {
            let mut released = handle.released.lock();
            while !*released && !handle.cancel.load(Ordering::SeqCst) {
                handle.release_cv.wait(&mut released);
            }
        }
        {
            let mut record = handle.record.lock();
            if record.status == RunStatus::Held {
                record.status = RunStatus::Running;
            }
        }

        let mut sim = Sim::new(&self, handle);
        sim.run();
        let status = sim.final_status();

        let mut record = handle.record.lock().clone();
        for outcome in record.nodes.values_mut() {
            if !outcome.state.is_terminal() {
                outcome.state = NodeState::Unexecuted;
            }
        }
        record.status = status;
        if let Some(dir) = &self.run_dir {
            if let Err(e) = record.write_to(dir) {
                *handle.storage_error.lock() = Some(format!("{}: {e}", dir.display()));
            }
        }
        *handle.record.lock() = record;
        handle.finished.notify_all();
    }
}

impl<'a> Sim<'a> {
    fn new(job: &'a Job, handle: &'a RunHandle) -> Self {
        let order: Vec<&str> = job.plan.order().collect();
        let index: HashMap<&str, usize> = order.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut waiting_on = vec![0; order.len()];
        for link in &job.wf.links {
            waiting_on[index[link.to.node.as_str()]] += 1;
        }
        Self {
            job,
            handle,
            state: vec![NodeState::Pending; order.len()],
            order,
            index,
            waiting_on,
            ready: BTreeSet::new(),
            running: BTreeSet::new(),
            results: HashMap::new(),
            busy: HashMap::new(),
            produced: HashMap::new(),
            now: 0,
            seq: 0,
            saw_cancel: false,
        }
    }

    fn cancelled(&mut self) -> bool {
        if self.handle.cancel.load(Ordering::SeqCst) {
            self.saw_cancel = true;
        }
        self.saw_cancel
    }

    fn emit(
        &mut self,
        record: &mut ExecutionRecord,
        idx: usize,
        kind: EventKind,
        resource: Option<&str>,
        detail: Option<String>,
    ) {
        let node = self.order[idx];
        let state = match kind {
            EventKind::Queued => NodeState::Queued,
            EventKind::Started => NodeState::Running,
            EventKind::Finished => NodeState::Finished,
            EventKind::Failed if resource.is_some() => NodeState::Failed,
            EventKind::Failed => NodeState::FailedByDependency,
        };
        self.state[idx] = state;
        let outcome = record.nodes.get_mut(node).expect("record lists every node");
        outcome.state = state;
        if kind == EventKind::Failed {
            outcome.error = detail.clone();
        }
        record.events.push(NodeEvent {
            seq: self.seq,
            time: self.now,
            node: node.to_string(),
            kind,
            resource: resource.map(str::to_string),
            detail,
        });
        self.seq += 1;
    }

    fn resource_of(&self, idx: usize) -> &'a str {
        self.job.plan.assignment[self.order[idx]].as_str()
    }

    fn run(&mut self) {
        {
            let mut record = self.handle.record.lock();
            for idx in 0..self.order.len() {
                if self.waiting_on[idx] == 0 {
                    self.emit(&mut record, idx, EventKind::Queued, None, None);
                    self.ready.insert((0, idx));
                }
            }
        }
        loop {
            if !self.cancelled() {
                self.start_ready();
            }
            let Some(&(t, _)) = self.running.first() else {
                break;
            };
            self.now = t;
            self.retire_due();
        }
    }

    fn start_ready(&mut self) {
        let mut batch = Vec::new();
        let candidates: Vec<(u64, usize)> = self.ready.iter().copied().collect();
        {
            let mut record = self.handle.record.lock();
            for key in candidates {
                let idx = key.1;
                let resource = self.resource_of(idx);
                let slots = self.job.plan.resource(resource).expect("plan covers pool").slots;
                let used = self.busy.entry(resource).or_default();
                if *used >= slots {
                    continue;
                }
                *used += 1;
                self.ready.remove(&key);
                self.emit(&mut record, idx, EventKind::Started, Some(resource), None);
                batch.push(idx);
            }
        }
        if batch.is_empty() {
            return;
        }
        let outcomes = self.run_batch(&batch);
        for (idx, result) in batch.into_iter().zip(outcomes) {
            let speed = self
                .job
                .plan
                .resource(self.resource_of(idx))
                .expect("plan covers pool")
                .speed_factor;
            let finish = self.now + node_cost(&self.job.wf, self.order[idx], speed);
            self.running.insert((finish, idx));
            self.results.insert(idx, result);
        }
    }

    fn run_batch(&self, batch: &[usize]) -> Vec<NodeResult> {
        let workers = self.job.worker_limit.min(batch.len());
        if workers <= 1 {
            return batch.iter().map(|&idx| self.run_node(idx)).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<NodeResult>>> = batch.iter().map(|_| Mutex::new(None)).collect();
        thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&idx) = batch.get(i) else { break };
                    *slots[i].lock() = Some(self.run_node(idx));
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().expect("every batch entry ran"))
            .collect()
    }

    /// Stages inputs, calls the adapter, and checks its outputs against the
    /// node's out-ports.
    fn run_node(&self, idx: usize) -> NodeResult {
        let job = self.job;
        let node = job.wf.node(self.order[idx]).expect("plan covers workflow");
        let adapter: &Arc<dyn ToolAdapter> = job.adapters.get(&node.tool).expect("checked at submit");

        let mut inputs = BTreeMap::new();
        for port in &node.in_ports {
            let ep = Endpoint::new(&node.id, &port.name);
            let bytes: &[u8] = match job.wf.links.iter().find(|l| l.to == ep) {
                Some(link) => &self.produced.get(&link.from).expect("predecessor finished").bytes,
                None => job.inputs.get(&ep).expect("checked at submit"),
            };
            inputs.insert(
                port.name.as_str(),
                Input {
                    kind: &port.payload_kind,
                    bytes,
                },
            );
        }
        let ctx = RunContext {
            node_id: &node.id,
            inputs,
            parameters: &node.parameters,
            script: node.script.as_ref(),
            seed: node_seed(job.seed, &node.id),
        };
        let outputs: Outputs = catch_unwind(AssertUnwindSafe(|| adapter.run(&ctx)))
            .unwrap_or_else(|_| Err(AdapterError::new(AdapterErrorKind::ToolFailed, "adapter panicked")))
            .map_err(|e| format!("{ADAPTER_FAILURE}: {e}"))?;

        let declared = &adapter.spec().outputs;
        if let Some(extra) = outputs.keys().find(|k| !declared.contains(k)) {
            return Err(format!(
                "{ADAPTER_FAILURE}: {} produced undeclared kind {extra}",
                node.tool
            ));
        }
        node.out_ports
            .iter()
            .map(|port| {
                let bytes = outputs.get(&port.payload_kind).ok_or_else(|| {
                    format!(
                        "{ADAPTER_FAILURE}: {} produced no {} for port {}",
                        node.tool, port.payload_kind, port.name
                    )
                })?;
                Ok(Artifact::new(
                    port.payload_kind.clone(),
                    bytes.clone(),
                    Producer {
                        run_id: job.run_id.clone(),
                        node: node.id.clone(),
                        port: port.name.clone(),
                    },
                ))
            })
            .collect()
    }

    fn retire_due(&mut self) {
        let mut record = self.handle.record.lock();
        while let Some(&(t, idx)) = self.running.first() {
            if t != self.now {
                break;
            }
            self.running.pop_first();
            let resource = self.resource_of(idx);
            *self.busy.get_mut(resource).expect("node was started") -= 1;
            match self.results.remove(&idx).expect("started nodes have results") {
                Ok(artifacts) => {
                    for a in &artifacts {
                        self.produced.insert(
                            Endpoint::new(&a.producer.node, &a.producer.port),
                            a.clone(),
                        );
                    }
                    record.artifacts.extend(artifacts);
                    self.emit(&mut record, idx, EventKind::Finished, Some(resource), None);
                    let node = self.order[idx];
                    for link in self.job.wf.outgoing(node) {
                        let succ = self.index[link.to.node.as_str()];
                        self.waiting_on[succ] -= 1;
                        if self.waiting_on[succ] == 0 && self.state[succ] == NodeState::Pending {
                            self.emit(&mut record, succ, EventKind::Queued, None, None);
                            self.ready.insert((self.now, succ));
                        }
                    }
                }
                Err(message) => {
                    self.emit(&mut record, idx, EventKind::Failed, Some(resource), Some(message));
                    self.fail_descendants(&mut record, idx);
                }
            }
        }
    }

    fn fail_descendants(&mut self, record: &mut ExecutionRecord, idx: usize) {
        let failed = self.order[idx];
        let mut doomed = BTreeSet::new();
        let mut queue = VecDeque::from([failed]);
        while let Some(n) = queue.pop_front() {
            for link in self.job.wf.outgoing(n) {
                let m = self.index[link.to.node.as_str()];
                if doomed.insert(m) {
                    queue.push_back(self.order[m]);
                }
            }
        }
        for m in doomed {
            if self.state[m] == NodeState::Pending {
                let detail = format!("dependency {failed} failed");
                self.emit(record, m, EventKind::Failed, None, Some(detail));
            }
        }
    }

    fn final_status(&self) -> RunStatus {
        if self.saw_cancel {
            RunStatus::Cancelled
        } else if self
            .state
            .iter()
            .any(|s| matches!(s, NodeState::Failed | NodeState::FailedByDependency))
        {
            RunStatus::Failed
        } else {
            RunStatus::Succeeded
        }
    }
}
