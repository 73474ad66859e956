//! Minimum-effort track planning.
//!
//! The planner picks the cheapest set of modules that ends at the target and
//! can be ordered so every prerequisite (or one of its alternatives) comes
//! first. Cost of a module is its expected effort in hours: duration in weeks
//! times the midpoint of its weekly workload. Among equally cheap tracks the
//! lexicographically smallest id sequence wins.
//!
//! The search is a branch and bound over module sets. A set is expanded only
//! through prerequisites it cannot yet order, so every explored set is a
//! plausible closure; the lexicographically smallest valid order of a set is
//! found greedily because "can be placed" only ever becomes true as more
//! modules are placed.

use std::collections::HashSet;

use crate::registry::{ModuleId, ModuleMeta};

use super::graph::PrereqGraph;
use super::track::{CourseTrack, TrackConstraints};
use super::CurriculumError;

/// Relative tolerance under which two plan costs count as equal.
pub const COST_TOLERANCE: f64 = 1e-9;

/// Planner cost of one module in hours.
pub fn module_cost(meta: &ModuleMeta) -> f64 {
    meta.expected_hours()
}

/// Total planner cost of a list of modules.
pub fn track_cost(track: &CourseTrack, graph: &PrereqGraph) -> f64 {
    track
        .entries
        .iter()
        .filter_map(|e| graph.module(e.as_str()))
        .map(module_cost)
        .sum()
}

pub fn costs_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

pub fn plan_track(
    target: &str,
    graph: &PrereqGraph,
    constraints: Option<&TrackConstraints>,
) -> Result<CourseTrack, CurriculumError> {
    let target_meta = graph
        .module(target)
        .ok_or_else(|| CurriculumError::UnknownModule(target.to_string()))?;
    let default_constraints = TrackConstraints::default();
    let constraints = constraints.unwrap_or(&default_constraints);
    constraints.validate()?;
    if let Some(why) = constraints.module_violation(target_meta) {
        return Err(CurriculumError::Unsatisfiable(why));
    }

    let search = Search::new(graph, constraints, target);
    let entries = search.run()?;
    Ok(CourseTrack {
        id: format!("plan-{target}"),
        title: format!("Track to {}", target_meta.title),
        entries,
        created_by: "planner".to_string(),
    })
}

/// Compact set of node indices.
#[derive(Clone, PartialEq, Eq, Hash)]
struct NodeSet(Vec<u64>);

impl NodeSet {
    fn new(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
}

struct Node<'g> {
    id: &'g ModuleId,
    cost: f64,
    minutes: u64,
    allowed: bool,
    /// For each prerequisite: indices of in-graph satisfiers (never self).
    requirements: Vec<Requirement<'g>>,
}

struct Requirement<'g> {
    name: &'g ModuleId,
    satisfiers: Vec<usize>,
}

enum DeadEnd {
    External { module: ModuleId, prereq: ModuleId },
}

struct Best {
    cost: f64,
    order: Vec<usize>,
}

struct Search<'g> {
    nodes: Vec<Node<'g>>,
    target: usize,
    max_minutes: Option<u64>,
    visited: HashSet<NodeSet>,
    best: Option<Best>,
    dead_end: Option<DeadEnd>,
}

impl<'g> Search<'g> {
    fn new(graph: &'g PrereqGraph, constraints: &TrackConstraints, target: &str) -> Self {
        // node_ids() is sorted, so index order is id order.
        let ids: Vec<&ModuleId> = graph.node_ids().collect();
        let index_of = |id: &ModuleId| ids.binary_search(&id).ok();
        let nodes = ids
            .iter()
            .enumerate()
            .map(|(idx, id)| {
                let meta = graph.module(id.as_str()).expect("node ids resolve");
                let requirements = graph
                    .requires(id.as_str())
                    .iter()
                    .map(|req| Requirement {
                        name: req,
                        satisfiers: graph
                            .satisfiers(req.as_str())
                            .into_iter()
                            .filter_map(index_of)
                            .filter(|&s| s != idx)
                            .collect(),
                    })
                    .collect();
                Node {
                    id,
                    cost: module_cost(meta),
                    minutes: meta.duration.minutes(),
                    allowed: constraints.admits(meta),
                    requirements,
                }
            })
            .collect();
        let target = ids
            .iter()
            .position(|i| i.as_str() == target)
            .expect("target checked by caller");
        Self {
            nodes,
            target,
            max_minutes: constraints.max_total_minutes.map(|d| d.minutes()),
            visited: HashSet::new(),
            best: None,
            dead_end: None,
        }
    }

    fn run(mut self) -> Result<Vec<ModuleId>, CurriculumError> {
        let mut start = NodeSet::new(self.nodes.len());
        start.insert(self.target);
        let cost = self.nodes[self.target].cost;
        let minutes = self.nodes[self.target].minutes;
        self.expand(start, vec![self.target], cost, minutes);

        match self.best {
            Some(best) => Ok(best
                .order
                .into_iter()
                .map(|i| self.nodes[i].id.clone())
                .collect()),
            None => Err(match self.dead_end {
                Some(DeadEnd::External { module, prereq }) => {
                    CurriculumError::UnresolvedPrereq { module, prereq }
                }
                None => CurriculumError::Unsatisfiable(format!(
                    "no track to {} satisfies the prerequisites under the given constraints",
                    self.nodes[self.target].id
                )),
            }),
        }
    }

    fn over_bound(&self, cost: f64) -> bool {
        match &self.best {
            Some(best) => cost > best.cost && !costs_equal(cost, best.cost),
            None => false,
        }
    }

    fn expand(&mut self, set: NodeSet, members: Vec<usize>, cost: f64, minutes: u64) {
        if self.over_bound(cost) || self.max_minutes.is_some_and(|max| minutes > max) {
            return;
        }
        if !self.visited.insert(set.clone()) {
            return;
        }

        let (order, stuck) = self.greedy_order(&set, &members);
        if stuck.is_empty() {
            self.offer(cost, order);
            return;
        }

        let placed = {
            let mut placed = NodeSet::new(self.nodes.len());
            for &i in &order {
                placed.insert(i);
            }
            placed
        };

        // A prerequisite with no satisfier in the set at all has to be
        // brought in, so branching on it alone is complete. Otherwise any
        // missing satisfier of a stuck module may be the one that unblocks.
        let mut open: Option<(usize, usize)> = None;
        let mut blocked: Vec<(usize, usize)> = Vec::new();
        for &m in &stuck {
            for (r, req) in self.nodes[m].requirements.iter().enumerate() {
                if req.satisfiers.iter().any(|&s| placed.contains(s)) {
                    continue;
                }
                if !req.satisfiers.iter().any(|&s| set.contains(s)) {
                    open.get_or_insert((m, r));
                }
                blocked.push((m, r));
            }
        }
        let branch_on = match open {
            Some(one) => vec![one],
            None => blocked,
        };

        let mut candidates: Vec<usize> = Vec::new();
        for (m, r) in branch_on {
            let req = &self.nodes[m].requirements[r];
            if req.satisfiers.is_empty() {
                if self.dead_end.is_none() {
                    self.dead_end = Some(DeadEnd::External {
                        module: self.nodes[m].id.clone(),
                        prereq: req.name.clone(),
                    });
                }
                continue;
            }
            candidates.extend(
                req.satisfiers
                    .iter()
                    .copied()
                    .filter(|&s| !set.contains(s) && self.nodes[s].allowed),
            );
        }
        candidates.sort_unstable();
        candidates.dedup();
        // Cheapest first tightens the bound early.
        candidates.sort_by(|&a, &b| self.nodes[a].cost.total_cmp(&self.nodes[b].cost));

        for c in candidates {
            let mut next = set.clone();
            next.insert(c);
            let mut next_members = members.clone();
            next_members.push(c);
            self.expand(
                next,
                next_members,
                cost + self.nodes[c].cost,
                minutes + self.nodes[c].minutes,
            );
        }
    }

    /// Lexicographically smallest placement of `members` with the target
    /// last. Returns the placed prefix and the members left unplaced.
    fn greedy_order(&self, set: &NodeSet, members: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut pending: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&m| m != self.target)
            .collect();
        pending.sort_unstable();
        let mut placed = NodeSet::new(self.nodes.len());
        let mut order = Vec::with_capacity(members.len());
        debug_assert!(set.contains(self.target));

        loop {
            let pick = pending
                .iter()
                .position(|&m| self.placeable(m, &placed));
            match pick {
                Some(pos) => {
                    let m = pending.remove(pos);
                    placed.insert(m);
                    order.push(m);
                }
                None => break,
            }
        }
        if pending.is_empty() && self.placeable(self.target, &placed) {
            order.push(self.target);
            (order, Vec::new())
        } else {
            pending.push(self.target);
            (order, pending)
        }
    }

    fn placeable(&self, m: usize, placed: &NodeSet) -> bool {
        self.nodes[m]
            .requirements
            .iter()
            .all(|req| req.satisfiers.iter().any(|&s| placed.contains(s)))
    }

    fn offer(&mut self, cost: f64, order: Vec<usize>) {
        let better = match &self.best {
            None => true,
            Some(best) if costs_equal(cost, best.cost) => {
                let ids = |o: &[usize]| o.iter().map(|&i| self.nodes[i].id).collect::<Vec<_>>();
                ids(&order) < ids(&best.order)
            }
            Some(best) => cost < best.cost,
        };
        if better {
            self.best = Some(Best { cost, order });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curriculum::track::check_track;
    use crate::fixtures::{self, id, module, module_with_cost};
    use crate::registry::{Duration, ScaleLevel};

    fn entries(track: &CourseTrack) -> Vec<&str> {
        track.entries.iter().map(|e| e.as_str()).collect()
    }

    #[test]
    fn root_plans_to_itself() {
        let graph = PrereqGraph::build(&[module("a", &[]), module("b", &["a"])]).unwrap();
        let plan = plan_track("a", &graph, None).unwrap();
        assert_eq!(entries(&plan), ["a"]);
    }

    #[test]
    fn diamond() {
        let graph = PrereqGraph::build(&fixtures::diamond()).unwrap();
        let plan = plan_track("d", &graph, None).unwrap();
        assert_eq!(entries(&plan), ["a", "b", "c", "d"]);
        assert!(check_track(&plan, &graph, None).unwrap().is_empty());
    }

    #[test]
    fn cheaper_alternative_replaces_prerequisite() {
        let mut target = module_with_cost("t", &["expensive"], 1, 8.0);
        target.alternatives.clear();
        let mut cheap = module_with_cost("cheap", &[], 1, 1.0);
        cheap.alternatives = vec![id("expensive")];
        let expensive = module_with_cost("expensive", &[], 1, 10.0);
        let graph = PrereqGraph::build(&[target, cheap, expensive]).unwrap();
        let plan = plan_track("t", &graph, None).unwrap();
        assert_eq!(entries(&plan), ["cheap", "t"]);
    }

    #[test]
    fn external_prerequisite_is_unresolved() {
        let graph = PrereqGraph::build(&[fixtures::table1_module()]).unwrap();
        match plan_track(fixtures::TABLE1_ID, &graph, None) {
            Err(CurriculumError::UnresolvedPrereq { prereq, .. }) => {
                assert_eq!(prereq.as_str(), "md-simulation-of-metal-nanocrystals")
            }
            other => panic!("expected UNRESOLVED_PREREQ, got {other:?}"),
        }
    }

    #[test]
    fn table1_plan_uses_cheaper_prerequisite() {
        let graph = PrereqGraph::build(&fixtures::table1_fixture_set()).unwrap();
        let plan = plan_track(fixtures::TABLE1_ID, &graph, None).unwrap();
        assert_eq!(plan.entries.last().unwrap().as_str(), fixtures::TABLE1_ID);
        assert_eq!(plan.entries.len(), 2);
        assert!(check_track(&plan, &graph, None).unwrap().is_empty());
    }

    #[test]
    fn constraints_can_make_plans_unsatisfiable() {
        let graph = PrereqGraph::build(&fixtures::diamond()).unwrap();
        let c = TrackConstraints {
            max_total_minutes: Some(Duration::from_minutes(60).unwrap()),
            ..Default::default()
        };
        assert_eq!(
            plan_track("d", &graph, Some(&c)).unwrap_err().code(),
            "UNSATISFIABLE"
        );
        let c = TrackConstraints {
            allowed_scales: Some([ScaleLevel::Nano].into()),
            ..Default::default()
        };
        assert_eq!(
            plan_track("d", &graph, Some(&c)).unwrap_err().code(),
            "UNSATISFIABLE"
        );
        assert_eq!(plan_track("zz", &graph, None).unwrap_err().code(), "UNKNOWN_MODULE");
    }

    #[test]
    fn alternative_needed_to_break_ordering_deadlock() {
        // t needs p. The cheap way to satisfy p is q, but q itself needs t's
        // sibling s which needs p: q can never come first. The plan must fall
        // back to p itself.
        let t = module_with_cost("t", &["p", "s"], 1, 1.0);
        let s = module_with_cost("s", &["p"], 1, 1.0);
        let mut q = module_with_cost("q", &["s"], 1, 0.5);
        q.alternatives = vec![id("p")];
        let p = module_with_cost("p", &[], 1, 5.0);
        let graph = PrereqGraph::build(&[t, s, q, p]).unwrap();
        let plan = plan_track("t", &graph, None).unwrap();
        assert!(check_track(&plan, &graph, None).unwrap().is_empty());
        assert_eq!(entries(&plan), ["p", "s", "t"]);
    }
}
