mod common;

use common::{exhaustive_min_cost, random_constraints, random_module_dag, rng};
use coursegate::curriculum::{
    aggregate, check_track, classify_scale, costs_equal, plan_track, track_cost, CourseTrack,
    PrereqGraph,
};
use coursegate::fixtures;
use coursegate::registry::{Duration, ModuleId, ScaleLevel};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn reference_scale_table() {
    let cases = [
        (Duration::from_minutes(10), ScaleLevel::Nano),
        (Duration::from_minutes(30), ScaleLevel::Nano),
        (Duration::from_hours(1), ScaleLevel::Micro),
        (Duration::from_hours(8), ScaleLevel::Micro),
        (Duration::from_days(1), ScaleLevel::Mini),
        (Duration::from_days(14), ScaleLevel::Mini),
        (Duration::from_months(1), ScaleLevel::Macro),
        (Duration::from_months(6), ScaleLevel::Macro),
    ];
    for (d, expected) in cases {
        let d = d.unwrap();
        assert_eq!(classify_scale(d), expected, "{d:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn classify_scale_is_monotone(a in 1u64..600_000, b in 1u64..600_000) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s_lo = classify_scale(Duration::from_minutes(lo).unwrap());
        let s_hi = classify_scale(Duration::from_minutes(hi).unwrap());
        prop_assert!(s_lo <= s_hi, "{lo} -> {s_lo:?}, {hi} -> {s_hi:?}");
    }
}

#[test]
fn planner_matches_exhaustive_oracle() {
    for seed in 0..200u64 {
        let mut r = rng(1000 + seed);
        let n = r.gen_range(1..=10);
        let modules = random_module_dag(&mut r, n);
        let target = modules[r.gen_range(0..n)].id.clone();
        let constraints = random_constraints(&mut r);
        let graph = PrereqGraph::build(&modules).unwrap();

        let oracle = exhaustive_min_cost(&modules, target.as_str(), constraints.as_ref());
        let planned = plan_track(target.as_str(), &graph, constraints.as_ref());
        match (oracle, planned) {
            (Some(best), Ok(track)) => {
                let cost = track_cost(&track, &graph);
                assert!(
                    costs_equal(cost, best),
                    "seed {seed}: planner cost {cost}, oracle {best}, track {:?}",
                    track.entries
                );
                assert_eq!(track.entries.last(), Some(&target), "seed {seed}");
                let report = check_track(&track, &graph, constraints.as_ref()).unwrap();
                assert!(report.is_empty(), "seed {seed}: {report}");
            }
            (None, Err(e)) => {
                assert!(
                    matches!(e.code(), "UNSATISFIABLE" | "UNRESOLVED_PREREQ"),
                    "seed {seed}: {e}"
                );
            }
            (oracle, planned) => panic!("seed {seed}: oracle {oracle:?}, planner {planned:?}"),
        }
    }
}

fn permutations(items: &[ModuleId]) -> Vec<Vec<ModuleId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

#[test]
fn diamond_plan_is_lexicographically_first_valid_order() {
    let modules = fixtures::diamond();
    let graph = PrereqGraph::build(&modules).unwrap();
    let ids: Vec<ModuleId> = modules.iter().map(|m| m.id.clone()).collect();
    let mut valid: Vec<Vec<ModuleId>> = permutations(&ids)
        .into_iter()
        .filter(|p| {
            let track = CourseTrack::new("t", "t", p.clone());
            check_track(&track, &graph, None).unwrap().is_empty()
        })
        .collect();
    valid.sort();
    let strs: Vec<Vec<&str>> = valid
        .iter()
        .map(|p| p.iter().map(ModuleId::as_str).collect())
        .collect();
    assert_eq!(strs, [["a", "b", "c", "d"], ["a", "c", "b", "d"]]);

    let plan = plan_track("d", &graph, None).unwrap();
    assert_eq!(plan.entries, valid[0]);
}

#[test]
fn check_track_is_order_sensitive() {
    let modules = fixtures::table1_fixture_set();
    let graph = PrereqGraph::build(&modules).unwrap();
    let track: CourseTrack = serde_json::from_str(fixtures::TRACK_JSON).unwrap();
    assert!(check_track(&track, &graph, None).unwrap().is_empty());

    let mut reversed = track.clone();
    reversed.entries.reverse();
    let report = check_track(&reversed, &graph, None).unwrap();
    assert!(report.contains_code("PREREQ_UNSATISFIED"), "{report}");

    // 1 week at [6, 8] plus 2 weeks at [8, 10].
    let agg = aggregate(&track, modules.as_slice()).unwrap();
    assert_eq!(agg.workload_hours.min_hours, 22.0);
    assert_eq!(agg.workload_hours.max_hours, 28.0);

    let alone = CourseTrack::new("t1", "t1", vec![ModuleId::new(fixtures::TABLE1_ID).unwrap()]);
    let agg = aggregate(&alone, modules.as_slice()).unwrap();
    assert_eq!(agg.workload_hours.min_hours, 16.0);
    assert_eq!(agg.workload_hours.max_hours, 20.0);
}

#[test]
fn aggregate_is_additive_over_concatenation() {
    for seed in 0..50 {
        let mut r = rng(seed);
        let modules = random_module_dag(&mut r, 8);
        let ids: Vec<ModuleId> = modules.iter().map(|m| m.id.clone()).collect();
        let cut = r.gen_range(0..=ids.len());
        let whole = aggregate(&CourseTrack::new("w", "w", ids.clone()), modules.as_slice()).unwrap();
        let left = aggregate(&CourseTrack::new("l", "l", ids[..cut].to_vec()), modules.as_slice()).unwrap();
        let right = aggregate(&CourseTrack::new("r", "r", ids[cut..].to_vec()), modules.as_slice()).unwrap();
        let combined = left.combine(&right);
        assert_eq!(whole.total_minutes, combined.total_minutes);
        assert_eq!(whole.total_exercises, combined.total_exercises);
        assert_eq!(whole.scale_histogram, combined.scale_histogram);
        assert!((whole.workload_hours.min_hours - combined.workload_hours.min_hours).abs() < 1e-9);
        assert!((whole.workload_hours.max_hours - combined.workload_hours.max_hours).abs() < 1e-9);
    }
}
