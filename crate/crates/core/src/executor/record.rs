use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::workflow::{Workflow, WorkflowId};

use super::artifact::{read_bytes, write_bytes, Artifact};
use super::resource::Resource;

pub const RECORD_FILE: &str = "record.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Queued,
    Started,
    Finished,
    Failed,
}

/// One state change. `seq` totally orders events within a run; `time` is
/// the simulated clock in ticks, non-decreasing in `seq`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeEvent {
    pub seq: u64,
    pub time: u64,
    pub node: String,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    Pending,
    Queued,
    Running,
    Finished,
    Failed,
    FailedByDependency,
    /// Never started because the run was cancelled.
    Unexecuted,
}

impl NodeState {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            Self::Finished | Self::Failed | Self::FailedByDependency | Self::Unexecuted
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Held,
    Running,
    Succeeded,
    Failed,
    Cancelled,
}

impl RunStatus {
    pub fn is_final(self) -> bool {
        matches!(self, Self::Succeeded | Self::Failed | Self::Cancelled)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeOutcome {
    pub state: NodeState,
    pub resource: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Execution history of one run. Immutable once `status` is final.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub run_id: String,
    pub workflow_id: WorkflowId,
    pub seed: u64,
    pub status: RunStatus,
    pub nodes: BTreeMap<String, NodeOutcome>,
    pub events: Vec<NodeEvent>,
    pub artifacts: Vec<Artifact>,
}

/// Lightweight status view for polling clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSnapshot {
    pub run_id: String,
    pub workflow_id: WorkflowId,
    pub status: RunStatus,
    pub nodes: BTreeMap<String, NodeState>,
    pub artifacts: Vec<ArtifactRef>,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRef {
    pub node: String,
    pub port: String,
    pub id: String,
    pub kind: String,
    pub size: u64,
}

impl ExecutionRecord {
    pub fn snapshot(&self) -> RunSnapshot {
        RunSnapshot {
            run_id: self.run_id.clone(),
            workflow_id: self.workflow_id.clone(),
            status: self.status,
            nodes: self.nodes.iter().map(|(k, v)| (k.clone(), v.state)).collect(),
            artifacts: self
                .artifacts
                .iter()
                .map(|a| ArtifactRef {
                    node: a.producer.node.clone(),
                    port: a.producer.port.clone(),
                    id: a.id.clone(),
                    kind: a.kind.clone(),
                    size: a.size,
                })
                .collect(),
            events: self.events.len(),
        }
    }

    pub fn artifact(&self, node: &str, port: &str) -> Option<&Artifact> {
        self.artifacts
            .iter()
            .find(|a| a.producer.node == node && a.producer.port == port)
    }

    /// `(node, port) -> content id`; equal across replays of the same run.
    pub fn artifact_ids(&self) -> BTreeMap<(String, String), String> {
        self.artifacts
            .iter()
            .map(|a| ((a.producer.node.clone(), a.producer.port.clone()), a.id.clone()))
            .collect()
    }

    pub fn events_of<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a NodeEvent> + 'a {
        self.events.iter().filter(move |e| e.node == node)
    }

    pub fn event<'a>(&'a self, node: &'a str, kind: EventKind) -> Option<&'a NodeEvent> {
        self.events_of(node).find(|e| e.kind == kind)
    }

    pub fn started_count(&self) -> usize {
        self.events.iter().filter(|e| e.kind == EventKind::Started).count()
    }

    /// Events with run-specific data removed, for replay comparisons.
    pub fn schedule(&self) -> Vec<(u64, u64, &str, EventKind, Option<&str>)> {
        self.events
            .iter()
            .map(|e| (e.seq, e.time, e.node.as_str(), e.kind, e.resource.as_deref()))
            .collect()
    }

    /// Writes `record.json` and every artifact under `run_dir`.
    pub fn write_to(&self, run_dir: &Path) -> io::Result<()> {
        fs::create_dir_all(run_dir)?;
        for a in &self.artifacts {
            write_bytes(run_dir, a)?;
        }
        let json = serde_json::to_vec_pretty(self).map_err(io::Error::other)?;
        let tmp = run_dir.join(format!("{RECORD_FILE}.tmp"));
        fs::write(&tmp, json)?;
        fs::rename(tmp, run_dir.join(RECORD_FILE))
    }

    /// Inverse of [`write_to`](Self::write_to); verifies every artifact hash.
    pub fn read_from(run_dir: &Path) -> io::Result<Self> {
        let json = fs::read(run_dir.join(RECORD_FILE))?;
        let mut record: Self = serde_json::from_slice(&json)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        for a in &mut record.artifacts {
            read_bytes(run_dir, a)?;
        }
        Ok(record)
    }
}

/// `finished(m).seq < started(n).seq` and `finished(m).time <= started(n).time`
/// for every link `m -> n` where `n` started.
pub fn check_dependency_order(record: &ExecutionRecord, wf: &Workflow) -> Result<(), String> {
    for link in &wf.links {
        let (m, n) = (link.from.node.as_str(), link.to.node.as_str());
        let Some(start) = record.event(n, EventKind::Started) else {
            continue;
        };
        let Some(done) = record.event(m, EventKind::Finished) else {
            return Err(format!("{n} started but its predecessor {m} never finished"));
        };
        if done.seq >= start.seq || done.time > start.time {
            return Err(format!(
                "{n} started at #{} t={} before {m} finished at #{} t={}",
                start.seq, start.time, done.seq, done.time
            ));
        }
    }
    Ok(())
}

/// Replays the events and checks that no resource ever hosts more running
/// nodes than it has slots.
pub fn check_slot_limits(record: &ExecutionRecord, pool: &[Resource]) -> Result<(), String> {
    let slots: HashMap<&str, u32> = pool.iter().map(|r| (r.id.as_str(), r.slots)).collect();
    let mut running: HashMap<&str, u32> = HashMap::new();
    let mut host: HashMap<&str, &str> = HashMap::new();
    let mut events: Vec<&NodeEvent> = record.events.iter().collect();
    events.sort_by_key(|e| e.seq);
    for e in events {
        match e.kind {
            EventKind::Started => {
                let r = e
                    .resource
                    .as_deref()
                    .ok_or_else(|| format!("{} started without a resource", e.node))?;
                let limit = *slots
                    .get(r)
                    .ok_or_else(|| format!("{} started on unknown resource {r}", e.node))?;
                let count = running.entry(r).or_default();
                *count += 1;
                if *count > limit {
                    return Err(format!(
                        "{r} hosts {count} nodes at t={} but has {limit} slots",
                        e.time
                    ));
                }
                host.insert(&e.node, r);
            }
            EventKind::Finished | EventKind::Failed => {
                if let Some(r) = host.remove(e.node.as_str()) {
                    *running.get_mut(r).expect("started before") -= 1;
                }
            }
            EventKind::Queued => {}
        }
    }
    Ok(())
}

/// Every artifact hashes to its id.
pub fn check_artifacts(record: &ExecutionRecord) -> Result<(), String> {
    match record.artifacts.iter().find(|a| !a.verify()) {
        Some(a) => Err(format!("artifact {}/{} fails its hash", a.producer.node, a.producer.port)),
        None => Ok(()),
    }
}
