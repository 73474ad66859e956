use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::registry::ModuleId;

/// Upper bound on an attached script.
pub const MAX_SCRIPT_BYTES: usize = 1 << 20;

/// String-to-string parameter map of one crate.
pub type ParameterSet = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkflowId(String);

impl WorkflowId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WorkflowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for WorkflowId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for WorkflowId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub direction: Direction,
    /// Artifact kind carried by the port, e.g. `trajectory-table`.
    pub payload_kind: String,
}

impl Port {
    pub fn input(name: impl Into<String>, kind: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            direction: Direction::In,
            payload_kind: kind.into(),
        }
    }

    pub fn output(name: impl Into<String>, kind: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            direction: Direction::Out,
            payload_kind: kind.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptRole {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScriptBinding {
    pub content: String,
    pub role: ScriptRole,
}

impl ScriptBinding {
    pub fn input(content: impl Into<String>) -> Self {
        Self {
            content: content.into(),
            role: ScriptRole::Input,
        }
    }

    pub fn output(content: impl Into<String>) -> Self {
        Self {
            content: content.into(),
            role: ScriptRole::Output,
        }
    }
}

/// One tool invocation inside a workflow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrateNode {
    pub id: String,
    /// Name of the adapter that runs this crate.
    pub tool: String,
    #[serde(default)]
    pub in_ports: Vec<Port>,
    #[serde(default)]
    pub out_ports: Vec<Port>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<ScriptBinding>,
    #[serde(default)]
    pub parameters: ParameterSet,
}

impl CrateNode {
    pub fn new(id: impl Into<String>, tool: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            tool: tool.into(),
            in_ports: Vec::new(),
            out_ports: Vec::new(),
            script: None,
            parameters: ParameterSet::new(),
        }
    }

    pub fn with_input(mut self, name: &str, kind: &str) -> Self {
        self.in_ports.push(Port::input(name, kind));
        self
    }

    pub fn with_output(mut self, name: &str, kind: &str) -> Self {
        self.out_ports.push(Port::output(name, kind));
        self
    }

    pub fn with_param(mut self, key: &str, value: &str) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn in_port(&self, name: &str) -> Option<&Port> {
        self.in_ports.iter().find(|p| p.name == name)
    }

    pub fn out_port(&self, name: &str) -> Option<&Port> {
        self.out_ports.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub node: String,
    pub port: String,
}

impl Endpoint {
    pub fn new(node: impl Into<String>, port: impl Into<String>) -> Self {
        Self {
            node: node.into(),
            port: port.into(),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.port)
    }
}

/// Directed connection from an out-port to an in-port.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub from: Endpoint,
    pub to: Endpoint,
}

impl Link {
    pub fn new(from: (&str, &str), to: (&str, &str)) -> Self {
        Self {
            from: Endpoint::new(from.0, from.1),
            to: Endpoint::new(to.0, to.1),
        }
    }
}

/// A DAG of tool crates. Values are immutable in spirit: editing helpers
/// return a modified copy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workflow {
    pub id: WorkflowId,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub nodes: Vec<CrateNode>,
    #[serde(default)]
    pub links: Vec<Link>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owning_module: Option<ModuleId>,
}

impl Workflow {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        Self {
            id: WorkflowId::new(id),
            title: title.into(),
            nodes: Vec::new(),
            links: Vec::new(),
            owning_module: None,
        }
    }

    pub fn with_node(mut self, node: CrateNode) -> Self {
        self.nodes.push(node);
        self
    }

    pub fn with_link(mut self, from: (&str, &str), to: (&str, &str)) -> Self {
        self.links.push(Link::new(from, to));
        self
    }

    pub fn node(&self, id: &str) -> Option<&CrateNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    /// Nodes sorted by id and links sorted, the form used on the wire.
    pub fn canonicalized(&self) -> Self {
        let mut wf = self.clone();
        wf.nodes.sort_by(|a, b| a.id.cmp(&b.id));
        wf.links.sort();
        wf
    }

    /// Same nodes and links, ignoring order and the workflow's own id/title.
    pub fn structurally_eq(&self, other: &Self) -> bool {
        let a = self.canonicalized();
        let b = other.canonicalized();
        a.nodes == b.nodes && a.links == b.links
    }

    /// Links whose target is `node`.
    pub fn incoming<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a Link> + 'a {
        self.links.iter().filter(move |l| l.to.node == node)
    }

    pub fn outgoing<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a Link> + 'a {
        self.links.iter().filter(move |l| l.from.node == node)
    }
}
