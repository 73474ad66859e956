//! Run the full pipeline on a simulated cluster and PC, then print the
//! schedule and the content-addressed artifacts.

use coursegate::executor::{plan_execution, AdapterRegistry, Executor, Policy, RunInputs};
use coursegate::fixtures;

fn main() {
    let wf = fixtures::pipeline(3);
    let pool = fixtures::pool();
    let plan = plan_execution(&wf, &pool, Policy::RoundRobin).unwrap();
    for (node, resource) in &plan.assignment {
        println!("{node} -> {resource}");
    }

    let executor = Executor::new(AdapterRegistry::with_builtins());
    let record = executor.execute(&wf, &plan, RunInputs::new(), 42).unwrap();
    println!("run {} finished {:?}", record.run_id, record.status);
    for (seq, time, node, kind, resource) in record.schedule() {
        println!("  t={time:<6} #{seq:<3} {node:<8} {kind:?} {}", resource.unwrap_or("-"));
    }
    for a in &record.artifacts {
        println!("  {}.{} {} ({} bytes)", a.producer.node, a.producer.port, a.id, a.size);
    }

    let again = executor.execute(&wf, &plan, RunInputs::new(), 42).unwrap();
    assert_eq!(record.artifact_ids(), again.artifact_ids());
    println!("replay with the same seed gives the same artifact ids");
}
