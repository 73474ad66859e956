//! Plug a new tool into the executor: an adapter that counts trajectory rows
//! downstream of the built-in simulation stub.

use std::sync::Arc;

use coursegate::executor::stubs::{TrajectoryTable, TRAJECTORY_TABLE};
use coursegate::executor::{
    plan_execution, AdapterError, AdapterRegistry, AdapterSpec, Executor, Outputs, Policy,
    RunContext, RunInputs, ToolAdapter,
};
use coursegate::fixtures;
use coursegate::workflow::{CrateNode, Workflow};

struct RowCounter {
    spec: AdapterSpec,
}

impl ToolAdapter for RowCounter {
    fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    fn run(&self, ctx: &RunContext<'_>) -> Result<Outputs, AdapterError> {
        let table = TrajectoryTable::parse(ctx.text_input(TRAJECTORY_TABLE)?)?;
        let mut out = Outputs::new();
        out.insert("count".into(), format!("{}\n", table.rows.len()).into_bytes());
        Ok(out)
    }
}

fn main() {
    let mut adapters = AdapterRegistry::with_builtins();
    adapters.register(Arc::new(RowCounter {
        spec: AdapterSpec::new("row-counter", &[TRAJECTORY_TABLE], &["count"]),
    }));

    let wf = Workflow::new("count-rows", "count trajectory rows")
        .with_node(
            CrateNode::new("lammps", "lammps-stub")
                .with_output("trajectory", TRAJECTORY_TABLE)
                .with_param("steps", "250"),
        )
        .with_node(
            CrateNode::new("count", "row-counter")
                .with_input("trajectory", TRAJECTORY_TABLE)
                .with_output("n", "count"),
        )
        .with_link(("lammps", "trajectory"), ("count", "trajectory"));

    let plan = plan_execution(&wf, &fixtures::pool(), Policy::FastestFit).unwrap();
    let record = Executor::new(adapters).execute(&wf, &plan, RunInputs::new(), 1).unwrap();
    let n = record.artifact("count", "n").unwrap();
    println!("{:?}: lammps wrote {} rows", record.status, n.text().unwrap().trim());
}
