use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::workflow::{ParameterSet, ScriptBinding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AdapterErrorKind {
    BadParameter,
    MissingInput,
    MalformedInput,
    ToolFailed,
}

impl AdapterErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            Self::BadParameter => "BAD_PARAMETER",
            Self::MissingInput => "MISSING_INPUT",
            Self::MalformedInput => "MALFORMED_INPUT",
            Self::ToolFailed => "TOOL_FAILED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{}: {message}", kind.code())]
pub struct AdapterError {
    pub kind: AdapterErrorKind,
    pub message: String,
}

impl AdapterError {
    pub fn new(kind: AdapterErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn bad_parameter(message: impl Into<String>) -> Self {
        Self::new(AdapterErrorKind::BadParameter, message)
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(AdapterErrorKind::MalformedInput, message)
    }

    pub fn code(&self) -> &'static str {
        self.kind.code()
    }
}

/// Tool name and the payload kinds it consumes and produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterSpec {
    pub tool: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl AdapterSpec {
    pub fn new(tool: &str, inputs: &[&str], outputs: &[&str]) -> Self {
        Self {
            tool: tool.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// An artifact staged into a node's in-port.
#[derive(Debug, Clone, Copy)]
pub struct Input<'a> {
    pub kind: &'a str,
    pub bytes: &'a [u8],
}

/// Everything an adapter may look at. Adapters see nothing else.
#[derive(Debug, Clone)]
pub struct RunContext<'a> {
    pub node_id: &'a str,
    /// Keyed by in-port name.
    pub inputs: BTreeMap<&'a str, Input<'a>>,
    pub parameters: &'a ParameterSet,
    pub script: Option<&'a ScriptBinding>,
    pub seed: u64,
}

impl<'a> RunContext<'a> {
    /// Bytes of the first in-port (by name) carrying `kind`.
    pub fn input_of_kind(&self, kind: &str) -> Result<&'a [u8], AdapterError> {
        self.inputs
            .values()
            .find(|i| i.kind == kind)
            .map(|i| i.bytes)
            .ok_or_else(|| {
                AdapterError::new(
                    AdapterErrorKind::MissingInput,
                    format!("node {} has no {kind} input", self.node_id),
                )
            })
    }

    pub fn text_input(&self, kind: &str) -> Result<&'a str, AdapterError> {
        std::str::from_utf8(self.input_of_kind(kind)?)
            .map_err(|_| AdapterError::malformed(format!("{kind} input is not UTF-8")))
    }

    fn parse<T: FromStr>(&self, name: &str, default: T) -> Result<T, AdapterError> {
        match self.parameters.get(name) {
            None => Ok(default),
            Some(raw) => raw.trim().parse().map_err(|_| {
                AdapterError::bad_parameter(format!("{name} = {raw:?} is not numeric"))
            }),
        }
    }

    /// Integer parameter that must be at least `min` (and at least 1).
    pub fn positive_int(&self, name: &str, default: u64, min: u64) -> Result<u64, AdapterError> {
        let v = self.parse(name, default)?;
        if v < min.max(1) {
            return Err(AdapterError::bad_parameter(format!(
                "{name} = {v}; it must be at least {}",
                min.max(1)
            )));
        }
        Ok(v)
    }

    pub fn positive_float(&self, name: &str, default: f64) -> Result<f64, AdapterError> {
        let v = self.finite_float(name, default)?;
        if v <= 0.0 {
            return Err(AdapterError::bad_parameter(format!("{name} = {v}; it must be positive")));
        }
        Ok(v)
    }

    pub fn non_negative_float(&self, name: &str, default: f64) -> Result<f64, AdapterError> {
        let v = self.finite_float(name, default)?;
        if v < 0.0 {
            return Err(AdapterError::bad_parameter(format!("{name} = {v}; it must not be negative")));
        }
        Ok(v)
    }

    pub fn finite_float(&self, name: &str, default: f64) -> Result<f64, AdapterError> {
        let v: f64 = self.parse(name, default)?;
        if !v.is_finite() {
            return Err(AdapterError::bad_parameter(format!("{name} must be finite")));
        }
        Ok(v)
    }
}

/// Out-artifact bytes keyed by payload kind.
pub type Outputs = BTreeMap<String, Vec<u8>>;

/// In-process wrapper around one tool.
///
/// `run` must be deterministic in its context and must not touch shared
/// state: the executor calls adapters from several threads at once.
pub trait ToolAdapter: Send + Sync {
    fn spec(&self) -> &AdapterSpec;

    fn run(&self, ctx: &RunContext<'_>) -> Result<Outputs, AdapterError>;
}

/// Adapters by tool name.
#[derive(Clone, Default)]
pub struct AdapterRegistry {
    adapters: BTreeMap<String, Arc<dyn ToolAdapter>>,
}

impl AdapterRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The five stub tools.
    pub fn with_builtins() -> Self {
        let mut reg = Self::new();
        for adapter in super::stubs::builtin_adapters() {
            reg.register(adapter);
        }
        reg
    }

    /// Adds or replaces the adapter for its tool name.
    pub fn register(&mut self, adapter: Arc<dyn ToolAdapter>) -> Option<Arc<dyn ToolAdapter>> {
        self.adapters.insert(adapter.spec().tool.clone(), adapter)
    }

    pub fn remove(&mut self, tool: &str) -> Option<Arc<dyn ToolAdapter>> {
        self.adapters.remove(tool)
    }

    pub fn get(&self, tool: &str) -> Option<&Arc<dyn ToolAdapter>> {
        self.adapters.get(tool)
    }

    pub fn tools(&self) -> impl Iterator<Item = &str> {
        self.adapters.keys().map(String::as_str)
    }

    pub fn specs(&self) -> impl Iterator<Item = &AdapterSpec> {
        self.adapters.values().map(|a| a.spec())
    }
}

impl crate::workflow::ToolLookup for AdapterRegistry {
    fn knows_tool(&self, tool: &str) -> bool {
        self.adapters.contains_key(tool)
    }
}

impl fmt::Debug for AdapterRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.adapters.keys()).finish()
    }
}
