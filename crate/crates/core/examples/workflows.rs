//! Compose workflows: validate the shipped pipelines, derive a subset,
//! change parameters and print the canonical JSON.

use coursegate::fixtures;
use coursegate::workflow::{
    builtin_tools, derive_subset, serialize_workflow, set_parameters, topo_layers, validate_workflow,
    ParameterSet,
};

fn main() {
    let tools = builtin_tools();
    for n in 1..=3 {
        let wf = fixtures::pipeline(n);
        let report = validate_workflow(&wf, &tools);
        println!("{}: {} nodes, layers {:?}, {} findings", wf.id, wf.nodes.len(), topo_layers(&wf).unwrap(), report.len());
    }

    let full = fixtures::pipeline(3);
    let subset = derive_subset(&full, &["lammps", "r"]).unwrap();
    println!("subset of {} equals pipeline-1: {}", full.id, subset.structurally_eq(&fixtures::pipeline(1)));

    let err = derive_subset(&full, &["r"]).unwrap_err();
    println!("keeping r alone: {}", err.code());

    let mut params = ParameterSet::new();
    params.insert("steps".into(), "200".into());
    params.insert("velocity_scale".into(), "0.2".into());
    let tuned = set_parameters(&subset, "lammps", params).unwrap();
    let json = serialize_workflow(&tuned).unwrap();
    println!("{}", String::from_utf8(json).unwrap());
}
