//! Plan the cheapest track to the Table-1 module, show what breaks when the
//! order is reversed, total the workload and print the prerequisite graph.

use coursegate::curriculum::{
    aggregate, check_track, classify_scale, plan_track, satisfying_candidates, track_cost,
    PrereqGraph,
};
use coursegate::fixtures;
use coursegate::registry::Duration;

fn main() {
    let modules = fixtures::table1_fixture_set();
    let graph = PrereqGraph::build(&modules).unwrap();

    let track = plan_track(fixtures::TABLE1_ID, &graph, None).unwrap();
    println!("planned {} (cost {:.1}):", track.id, track_cost(&track, &graph));
    for (i, id) in track.entries.iter().enumerate() {
        println!("  {}. {id}", i + 1);
    }

    let mut reversed = track.clone();
    reversed.entries.reverse();
    let report = check_track(&reversed, &graph, None).unwrap();
    println!("reversed order:\n{report}");
    let broken = reversed.entries[0].as_str();
    for (prereq, candidates) in satisfying_candidates(&reversed, &graph, broken) {
        println!("  {broken} needs {prereq}; any of {candidates:?} satisfies it");
    }

    let agg = aggregate(&track, modules.as_slice()).unwrap();
    println!(
        "total: {:.0} weeks, {}-{} hours, {} exercises",
        agg.total_weeks(),
        agg.workload_hours.min_hours,
        agg.workload_hours.max_hours,
        agg.total_exercises
    );

    for d in [Duration::from_minutes(20), Duration::from_hours(3), Duration::from_weeks(2)] {
        let d = d.unwrap();
        println!("{d} -> {}", classify_scale(d));
    }

    println!("{}", graph.to_dot());
}
