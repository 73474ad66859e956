//! Executable side of a module: DAGs of tool crates joined by typed links.
//!
//! Ports carry open-vocabulary payload kinds that are matched by string
//! equality. Each in-port accepts at most one link; fan-in needs an explicit
//! merge crate.

mod model;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use model::{
    CrateNode, Direction, Endpoint, Link, ParameterSet, Port, ScriptBinding, ScriptRole,
    Workflow, WorkflowId, MAX_SCRIPT_BYTES,
};
pub use validate::{
    is_token, validate_workflow, AnyTool, ToolLookup, CYCLE, DANGLING_ENDPOINT, DUPLICATE_INPUT_LINK,
    DUPLICATE_NODE, DUPLICATE_PORT, EMPTY_TOOL, INVALID_TOKEN, PORT_DIRECTION, PORT_KIND_MISMATCH,
    SCRIPT_TOO_LARGE, UNKNOWN_TOOL,
};

use crate::canonical;
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error("invalid workflow:\n{0}")]
    InvalidWorkflow(ValidationReport),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("{0} is fed by a node outside the subset")]
    BrokenDependency(Endpoint),
    #[error("malformed workflow: {0}")]
    MalformedWorkflow(String),
}

impl WorkflowError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidWorkflow(_) => "INVALID_WORKFLOW",
            Self::UnknownNode(_) => "UNKNOWN_NODE",
            Self::BrokenDependency(_) => "BROKEN_DEPENDENCY",
            Self::MalformedWorkflow(_) => "MALFORMED_WORKFLOW",
        }
    }
}

/// Names of the tools that ship with the executor.
pub fn builtin_tools() -> BTreeSet<String> {
    crate::executor::BUILTIN_TOOLS
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn ensure_structurally_valid(wf: &Workflow) -> Result<(), WorkflowError> {
    let report = validate_workflow(wf, &AnyTool);
    if report.has_errors() {
        Err(WorkflowError::InvalidWorkflow(report))
    } else {
        Ok(())
    }
}

/// Nodes grouped by the length of the longest path reaching them. Each layer
/// is sorted; concatenating the layers gives a topological order.
pub fn topo_layers(wf: &Workflow) -> Result<Vec<Vec<String>>, WorkflowError> {
    ensure_structurally_valid(wf)?;
    let mut depth: BTreeMap<&str, usize> = wf.node_ids().map(|id| (id, 0)).collect();
    let mut indegree: BTreeMap<&str, usize> = wf.node_ids().map(|id| (id, 0)).collect();
    for link in &wf.links {
        *indegree.get_mut(link.to.node.as_str()).expect("validated") += 1;
    }
    let mut ready: Vec<&str> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    while let Some(n) = ready.pop() {
        let d = depth[n];
        for link in wf.outgoing(n) {
            let m = link.to.node.as_str();
            let entry = depth.get_mut(m).expect("validated");
            *entry = (*entry).max(d + 1);
            let deg = indegree.get_mut(m).expect("validated");
            *deg -= 1;
            if *deg == 0 {
                ready.push(m);
            }
        }
    }
    let layer_count = depth.values().max().map_or(0, |d| d + 1);
    let mut layers = vec![Vec::new(); layer_count];
    // BTreeMap iteration keeps each layer sorted.
    for (id, d) in depth {
        layers[d].push(id.to_string());
    }
    Ok(layers)
}

/// Topological order: the layers concatenated.
pub fn topo_order(wf: &Workflow) -> Result<Vec<String>, WorkflowError> {
    Ok(topo_layers(wf)?.into_iter().flatten().collect())
}

/// Induced sub-workflow on `keep`. Fails if a kept in-port is fed by a
/// dropped node.
pub fn derive_subset<S: AsRef<str>>(wf: &Workflow, keep: &[S]) -> Result<Workflow, WorkflowError> {
    ensure_structurally_valid(wf)?;
    let keep: BTreeSet<&str> = keep.iter().map(AsRef::as_ref).collect();
    if let Some(unknown) = keep.iter().find(|k| wf.node(k).is_none()) {
        return Err(WorkflowError::UnknownNode(unknown.to_string()));
    }
    let mut broken: Vec<&Link> = wf
        .links
        .iter()
        .filter(|l| keep.contains(l.to.node.as_str()) && !keep.contains(l.from.node.as_str()))
        .collect();
    broken.sort();
    if let Some(link) = broken.first() {
        return Err(WorkflowError::BrokenDependency(link.to.clone()));
    }
    Ok(Workflow {
        id: wf.id.clone(),
        title: wf.title.clone(),
        nodes: wf
            .nodes
            .iter()
            .filter(|n| keep.contains(n.id.as_str()))
            .cloned()
            .collect(),
        links: wf
            .links
            .iter()
            .filter(|l| keep.contains(l.from.node.as_str()) && keep.contains(l.to.node.as_str()))
            .cloned()
            .collect(),
        owning_module: wf.owning_module.clone(),
    })
}

/// Copy of `wf` with the parameters of `node` replaced.
pub fn set_parameters(
    wf: &Workflow,
    node: &str,
    params: ParameterSet,
) -> Result<Workflow, WorkflowError> {
    let mut out = wf.clone();
    let target = out
        .nodes
        .iter_mut()
        .find(|n| n.id == node)
        .ok_or_else(|| WorkflowError::UnknownNode(node.to_string()))?;
    target.parameters = params;
    Ok(out)
}

/// Copy of `wf` with `script` attached to `node`, replacing any previous one.
pub fn attach_script(
    wf: &Workflow,
    node: &str,
    script: ScriptBinding,
) -> Result<Workflow, WorkflowError> {
    let mut out = wf.clone();
    let target = out
        .nodes
        .iter_mut()
        .find(|n| n.id == node)
        .ok_or_else(|| WorkflowError::UnknownNode(node.to_string()))?;
    target.script = Some(script);
    Ok(out)
}

/// Canonical JSON of a structurally valid workflow.
pub fn serialize_workflow(wf: &Workflow) -> Result<Vec<u8>, WorkflowError> {
    ensure_structurally_valid(wf)?;
    Ok(canonical::to_vec(&wf.canonicalized()).expect("workflow values always serialize"))
}

pub fn deserialize_workflow(bytes: &[u8]) -> Result<Workflow, WorkflowError> {
    let wf: Workflow = serde_json::from_slice(bytes)
        .map_err(|e| WorkflowError::MalformedWorkflow(e.to_string()))?;
    Ok(wf.canonicalized())
}
