use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::report::{Finding, ValidationReport};

use super::model::{Direction, Workflow, MAX_SCRIPT_BYTES};

pub const CYCLE: &str = "CYCLE";
pub const DANGLING_ENDPOINT: &str = "DANGLING_ENDPOINT";
pub const PORT_KIND_MISMATCH: &str = "PORT_KIND_MISMATCH";
pub const DUPLICATE_INPUT_LINK: &str = "DUPLICATE_INPUT_LINK";
pub const UNKNOWN_TOOL: &str = "UNKNOWN_TOOL";
pub const DUPLICATE_NODE: &str = "DUPLICATE_NODE";
pub const DUPLICATE_PORT: &str = "DUPLICATE_PORT";
pub const PORT_DIRECTION: &str = "PORT_DIRECTION";
pub const INVALID_TOKEN: &str = "INVALID_TOKEN";
pub const EMPTY_TOOL: &str = "EMPTY_TOOL";
pub const SCRIPT_TOO_LARGE: &str = "SCRIPT_TOO_LARGE";

/// Answers whether an adapter exists for a tool name.
pub trait ToolLookup {
    fn knows_tool(&self, tool: &str) -> bool;
}

impl ToolLookup for BTreeSet<String> {
    fn knows_tool(&self, tool: &str) -> bool {
        self.contains(tool)
    }
}

impl ToolLookup for [&str] {
    fn knows_tool(&self, tool: &str) -> bool {
        self.contains(&tool)
    }
}

/// Accepts every tool name; for purely structural checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnyTool;

impl ToolLookup for AnyTool {
    fn knows_tool(&self, _tool: &str) -> bool {
        true
    }
}

/// `[A-Za-z0-9][A-Za-z0-9._-]*`
pub fn is_token(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphanumeric())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

/// Structural check of a workflow. Unknown tools are only warnings so that
/// archives carrying foreign tools still load.
pub fn validate_workflow<T: ToolLookup + ?Sized>(wf: &Workflow, tools: &T) -> ValidationReport {
    let mut report = ValidationReport::new();

    if !is_token(wf.id.as_str()) {
        report.push(Finding::error(
            INVALID_TOKEN,
            Some("id".into()),
            format!("workflow id {:?} is not a valid token", wf.id.as_str()),
        ));
    }

    let mut seen_nodes = HashSet::new();
    for node in &wf.nodes {
        if !seen_nodes.insert(node.id.as_str()) {
            report.push(Finding::error(
                DUPLICATE_NODE,
                Some(node.id.clone()),
                format!("node id {} used more than once", node.id),
            ));
        }
        if !is_token(&node.id) {
            report.push(Finding::error(
                INVALID_TOKEN,
                Some(node.id.clone()),
                format!("node id {:?} is not a valid token", node.id),
            ));
        }
        if node.tool.trim().is_empty() {
            report.push(Finding::error(
                EMPTY_TOOL,
                Some(node.id.clone()),
                format!("node {} has no tool", node.id),
            ));
        } else if !tools.knows_tool(&node.tool) {
            report.push(Finding::warning(
                UNKNOWN_TOOL,
                Some(node.id.clone()),
                format!("no adapter registered for tool {:?}", node.tool),
            ));
        }
        for (ports, direction) in [(&node.in_ports, Direction::In), (&node.out_ports, Direction::Out)] {
            let mut names = HashSet::new();
            for port in ports {
                let field = Some(format!("{}.{}", node.id, port.name));
                if !names.insert(port.name.as_str()) {
                    report.push(Finding::error(
                        DUPLICATE_PORT,
                        field.clone(),
                        format!("port name {} repeated on node {}", port.name, node.id),
                    ));
                }
                if !is_token(&port.name) || !is_token(&port.payload_kind) {
                    report.push(Finding::error(
                        INVALID_TOKEN,
                        field.clone(),
                        "port name and payload kind must be tokens",
                    ));
                }
                if port.direction != direction {
                    report.push(Finding::error(
                        PORT_DIRECTION,
                        field,
                        "port listed under the wrong direction",
                    ));
                }
            }
        }
        if let Some(script) = &node.script {
            if script.content.len() > MAX_SCRIPT_BYTES {
                report.push(Finding::error(
                    SCRIPT_TOO_LARGE,
                    Some(node.id.clone()),
                    format!(
                        "script is {} bytes, limit is {MAX_SCRIPT_BYTES}",
                        script.content.len()
                    ),
                ));
            }
        }
    }

    let mut fed_inputs = HashSet::new();
    for link in &wf.links {
        let field = Some(format!("{} -> {}", link.from, link.to));
        let source = wf
            .node(&link.from.node)
            .and_then(|n| n.out_port(&link.from.port));
        let target = wf.node(&link.to.node).and_then(|n| n.in_port(&link.to.port));
        match (source, target) {
            (Some(src), Some(dst)) => {
                if src.payload_kind != dst.payload_kind {
                    report.push(Finding::error(
                        PORT_KIND_MISMATCH,
                        field.clone(),
                        format!(
                            "{} carries {:?} but {} expects {:?}",
                            link.from, src.payload_kind, link.to, dst.payload_kind
                        ),
                    ));
                }
            }
            _ => {
                let missing = if source.is_none() { &link.from } else { &link.to };
                report.push(Finding::error(
                    DANGLING_ENDPOINT,
                    field.clone(),
                    format!("endpoint {missing} does not exist"),
                ));
            }
        }
        if !fed_inputs.insert(&link.to) {
            report.push(Finding::error(
                DUPLICATE_INPUT_LINK,
                field,
                format!("{} already has an incoming link", link.to),
            ));
        }
    }

    if let Some(cycle_nodes) = nodes_on_cycles(wf) {
        report.push(Finding::error(
            CYCLE,
            None,
            format!("links form a cycle through {}", cycle_nodes.join(", ")),
        ));
    }

    report
}

/// Nodes left over after repeatedly removing nodes without incoming links.
fn nodes_on_cycles(wf: &Workflow) -> Option<Vec<String>> {
    let ids: BTreeSet<&str> = wf.node_ids().collect();
    let mut indegree: BTreeMap<&str, usize> = ids.iter().map(|id| (*id, 0)).collect();
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for link in &wf.links {
        let (from, to) = (link.from.node.as_str(), link.to.node.as_str());
        if ids.contains(from) && ids.contains(to) {
            *indegree.get_mut(to).expect("known node") += 1;
            succ.entry(from).or_default().push(to);
        }
    }
    let mut ready: Vec<&str> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    while let Some(n) = ready.pop() {
        indegree.remove(n);
        for m in succ.get(n).into_iter().flatten() {
            if let Some(d) = indegree.get_mut(m) {
                *d -= 1;
                if *d == 0 {
                    ready.push(m);
                }
            }
        }
    }
    (!indegree.is_empty()).then(|| indegree.keys().map(|s| s.to_string()).collect())
}
