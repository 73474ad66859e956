use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::workflow::{topo_layers, Workflow, WorkflowError, WorkflowId};

use super::resource::{validate_pool, Resource};
use super::ExecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Cycle through the pool (sorted by id) in topological-lexicographic order.
    RoundRobin,
    /// Everything on the resource with the smallest speed factor.
    FastestFit,
}

impl FromStr for Policy {
    type Err = ExecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "round_robin" => Ok(Self::RoundRobin),
            "fastest_fit" => Ok(Self::FastestFit),
            other => Err(ExecError::UnknownPolicy(other.to_string())),
        }
    }
}

/// Node-to-resource assignment for one workflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionPlan {
    pub workflow_id: WorkflowId,
    pub policy: Policy,
    pub assignment: BTreeMap<String, String>,
    pub layers: Vec<Vec<String>>,
    pub pool: Vec<Resource>,
}

impl ExecutionPlan {
    /// Nodes in execution order (layers concatenated).
    pub fn order(&self) -> impl Iterator<Item = &str> {
        self.layers.iter().flatten().map(String::as_str)
    }

    pub fn resource(&self, id: &str) -> Option<&Resource> {
        self.pool.iter().find(|r| r.id == id)
    }

    pub fn resource_of(&self, node: &str) -> Option<&Resource> {
        self.assignment.get(node).and_then(|r| self.resource(r))
    }

    /// Check that the plan assigns every node of `wf` to a pool resource.
    pub fn covers(&self, wf: &Workflow) -> Result<(), ExecError> {
        if self.workflow_id != wf.id {
            return Err(ExecError::PlanMismatch(format!(
                "plan is for workflow {}, not {}",
                self.workflow_id, wf.id
            )));
        }
        validate_pool(&self.pool)?;
        for node in wf.node_ids() {
            match self.assignment.get(node) {
                None => {
                    return Err(ExecError::PlanMismatch(format!("node {node} is not assigned")))
                }
                Some(r) if self.resource(r).is_none() => {
                    return Err(ExecError::PlanMismatch(format!(
                        "node {node} is assigned to unknown resource {r}"
                    )))
                }
                Some(_) => {}
            }
        }
        if self.assignment.len() != wf.nodes.len() {
            return Err(ExecError::PlanMismatch(
                "plan assigns nodes that are not in the workflow".into(),
            ));
        }
        Ok(())
    }
}

pub fn plan_execution(
    wf: &Workflow,
    pool: &[Resource],
    policy: Policy,
) -> Result<ExecutionPlan, ExecError> {
    validate_pool(pool)?;
    let layers = topo_layers(wf).map_err(|e| match e {
        WorkflowError::InvalidWorkflow(report) => ExecError::InvalidWorkflow(report),
        other => ExecError::PlanMismatch(other.to_string()),
    })?;

    let mut sorted: Vec<&Resource> = pool.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let order = layers.iter().flatten();
    let assignment: BTreeMap<String, String> = match policy {
        Policy::RoundRobin => order
            .enumerate()
            .map(|(i, node)| (node.clone(), sorted[i % sorted.len()].id.clone()))
            .collect(),
        Policy::FastestFit => {
            let best = sorted
                .iter()
                .min_by(|a, b| a.speed_factor.total_cmp(&b.speed_factor))
                .expect("pool is non-empty");
            order.map(|node| (node.clone(), best.id.clone())).collect()
        }
    };

    Ok(ExecutionPlan {
        workflow_id: wf.id.clone(),
        policy,
        assignment,
        layers,
        pool: pool.to_vec(),
    })
}
