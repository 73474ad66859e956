use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::registry::{ModuleId, ModuleMeta, Registry};
use crate::report::{Finding, ValidationReport};

use super::CurriculumError;

pub const NEXT_WITHOUT_PREVIOUS: &str = "NEXT_WITHOUT_PREVIOUS";

/// Anything that can resolve a module id to its record.
pub trait ModuleSource {
    fn lookup(&self, id: &str) -> Option<Cow<'_, ModuleMeta>>;
}

impl ModuleSource for Registry {
    fn lookup(&self, id: &str) -> Option<Cow<'_, ModuleMeta>> {
        self.get(id).map(Cow::Owned)
    }
}

impl ModuleSource for BTreeMap<ModuleId, ModuleMeta> {
    fn lookup(&self, id: &str) -> Option<Cow<'_, ModuleMeta>> {
        self.get(id).map(Cow::Borrowed)
    }
}

impl ModuleSource for [ModuleMeta] {
    fn lookup(&self, id: &str) -> Option<Cow<'_, ModuleMeta>> {
        self.iter().find(|m| m.id.as_str() == id).map(Cow::Borrowed)
    }
}

/// Prerequisite / continuation / alternative relations over a set of modules.
///
/// Built from an immutable snapshot; rebuild after the registry changes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrereqGraph {
    nodes: BTreeMap<ModuleId, ModuleMeta>,
    /// `a -> [b, ...]`: each `b` is listed in `a.previous`.
    requires: BTreeMap<ModuleId, Vec<ModuleId>>,
    /// `a -> [b, ...]`: each `b` is listed in `a.next`.
    suggests: BTreeMap<ModuleId, Vec<ModuleId>>,
    /// Declared alternatives per module.
    alt_groups: BTreeMap<ModuleId, BTreeSet<ModuleId>>,
    /// Alternatives made symmetric; keys may be external ids.
    alt_links: BTreeMap<ModuleId, BTreeSet<ModuleId>>,
    external: BTreeSet<ModuleId>,
}

impl PrereqGraph {
    /// Build the graph, rejecting prerequisite cycles among the given modules.
    pub fn build(modules: &[ModuleMeta]) -> Result<Self, CurriculumError> {
        let mut graph = PrereqGraph::default();
        for m in modules {
            if graph.nodes.insert(m.id.clone(), m.clone()).is_some() {
                return Err(CurriculumError::DuplicateModule(m.id.clone()));
            }
        }
        for m in modules {
            graph.requires.insert(m.id.clone(), dedup(&m.previous));
            graph.suggests.insert(m.id.clone(), dedup(&m.next));
            let alts: BTreeSet<ModuleId> = m.alternatives.iter().cloned().collect();
            for alt in &alts {
                graph
                    .alt_links
                    .entry(m.id.clone())
                    .or_default()
                    .insert(alt.clone());
                graph
                    .alt_links
                    .entry(alt.clone())
                    .or_default()
                    .insert(m.id.clone());
            }
            graph.alt_groups.insert(m.id.clone(), alts);
            for r in m.references() {
                if !graph.nodes.contains_key(r) {
                    graph.external.insert(r.clone());
                }
            }
        }
        if let Some(cycle) = graph.find_requires_cycle() {
            return Err(CurriculumError::CycleDetected(cycle));
        }
        Ok(graph)
    }

    pub fn from_registry(registry: &Registry) -> Result<Self, CurriculumError> {
        Self::build(&registry.modules())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn module(&self, id: &str) -> Option<&ModuleMeta> {
        self.nodes.get(id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &ModuleId> {
        self.nodes.keys()
    }

    pub fn modules(&self) -> impl Iterator<Item = &ModuleMeta> {
        self.nodes.values()
    }

    /// Declared prerequisites of `id` (may include external ids).
    pub fn requires(&self, id: &str) -> &[ModuleId] {
        self.requires.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn suggests(&self, id: &str) -> &[ModuleId] {
        self.suggests.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn alternatives(&self, id: &str) -> Option<&BTreeSet<ModuleId>> {
        self.alt_groups.get(id)
    }

    /// Referenced ids that are not nodes of this graph.
    pub fn external(&self) -> &BTreeSet<ModuleId> {
        &self.external
    }

    pub fn requires_edge_count(&self) -> usize {
        self.requires.values().map(Vec::len).sum()
    }

    pub fn suggests_edge_count(&self) -> usize {
        self.suggests.values().map(Vec::len).sum()
    }

    /// Whether `candidate` on its own fulfils a prerequisite naming `required`:
    /// it is `required` itself, or either one lists the other as an alternative.
    pub fn satisfies(&self, candidate: &str, required: &str) -> bool {
        candidate == required
            || self
                .alt_links
                .get(required)
                .is_some_and(|alts| alts.contains(candidate))
    }

    /// In-graph modules that fulfil a prerequisite naming `required`, sorted.
    pub fn satisfiers(&self, required: &str) -> Vec<&ModuleId> {
        let mut out: Vec<&ModuleId> = Vec::new();
        if let Some((id, _)) = self.nodes.get_key_value(required) {
            out.push(id);
        }
        if let Some(alts) = self.alt_links.get(required) {
            out.extend(alts.iter().filter(|a| self.nodes.contains_key(a.as_str())));
        }
        out.sort();
        out.dedup();
        out
    }

    /// Continuations of `id`: its own `next` list plus every module that
    /// names `id` as a prerequisite. Sorted, deduplicated.
    pub fn list_next(&self, id: &str) -> Result<Vec<ModuleId>, CurriculumError> {
        if !self.contains(id) {
            return Err(CurriculumError::UnknownModule(id.to_string()));
        }
        let mut out: BTreeSet<ModuleId> = self.suggests(id).iter().cloned().collect();
        for (other, reqs) in &self.requires {
            if reqs.iter().any(|r| r.as_str() == id) {
                out.insert(other.clone());
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Warn where `a.next` names `b` but `b.previous` omits `a`.
    pub fn lint_sockets(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        for (a, nexts) in &self.suggests {
            for b in nexts {
                if self.contains(b.as_str()) && !self.requires(b.as_str()).contains(a) {
                    report.push(Finding::warning(
                        NEXT_WITHOUT_PREVIOUS,
                        Some(a.to_string()),
                        format!("{a} suggests {b} but {b} does not list {a} as previous"),
                    ));
                }
            }
        }
        report
    }

    /// Graphviz rendering: requires solid, suggests dashed, alternatives dotted.
    /// Edges point from the earlier module to the later one.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph curriculum {\n  rankdir=LR;\n  node [shape=box];\n");
        for (id, m) in &self.nodes {
            let _ = writeln!(
                out,
                "  \"{id}\" [label=\"{}\\n({})\"];",
                m.title.replace('"', "\\\""),
                m.scale
            );
        }
        for id in &self.external {
            let _ = writeln!(out, "  \"{id}\" [style=dashed, color=gray];");
        }
        for (a, reqs) in &self.requires {
            for b in reqs {
                let _ = writeln!(out, "  \"{b}\" -> \"{a}\" [style=solid];");
            }
        }
        for (a, nexts) in &self.suggests {
            for b in nexts {
                let _ = writeln!(out, "  \"{a}\" -> \"{b}\" [style=dashed];");
            }
        }
        for (a, alts) in &self.alt_groups {
            for b in alts {
                let _ = writeln!(out, "  \"{a}\" -> \"{b}\" [style=dotted, dir=none];");
            }
        }
        out.push_str("}\n");
        out
    }

    /// One cycle of the requires relation among nodes, as `[a, b, ..., a]`.
    fn find_requires_cycle(&self) -> Option<Vec<ModuleId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut marks: BTreeMap<&ModuleId, Mark> =
            self.nodes.keys().map(|k| (k, Mark::New)).collect();

        for root in self.nodes.keys() {
            if marks[root] != Mark::New {
                continue;
            }
            // (node, index of the next edge to follow)
            let mut stack: Vec<(&ModuleId, usize)> = vec![(root, 0)];
            marks.insert(root, Mark::Active);
            while let Some((node, edge)) = stack.last_mut() {
                let reqs = self.requires(node.as_str());
                if *edge < reqs.len() {
                    let child = &reqs[*edge];
                    *edge += 1;
                    let Some((child, _)) = self.nodes.get_key_value(child.as_str()) else {
                        continue;
                    };
                    match marks[child] {
                        Mark::New => {
                            marks.insert(child, Mark::Active);
                            stack.push((child, 0));
                        }
                        Mark::Active => {
                            let start = stack.iter().position(|(n, _)| *n == child).unwrap_or(0);
                            let mut cycle: Vec<ModuleId> =
                                stack[start..].iter().map(|(n, _)| (*n).clone()).collect();
                            cycle.push(child.clone());
                            return Some(cycle);
                        }
                        Mark::Done => {}
                    }
                } else {
                    let node = *node;
                    marks.insert(node, Mark::Done);
                    stack.pop();
                }
            }
        }
        None
    }
}

impl ModuleSource for PrereqGraph {
    fn lookup(&self, id: &str) -> Option<Cow<'_, ModuleMeta>> {
        self.nodes.get(id).map(Cow::Borrowed)
    }
}

fn dedup(ids: &[ModuleId]) -> Vec<ModuleId> {
    let mut seen = BTreeSet::new();
    ids.iter().filter(|i| seen.insert(*i)).cloned().collect()
}
