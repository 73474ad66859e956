//! Acceptance gate. Runs every primary criterion at its stated tolerance and
//! time limit, printing one PASS/FAIL line each, then fails if any failed.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{
    adapters_with_mix, exhaustive_min_cost, random_constraints, random_mix_workflow,
    random_module_dag, random_pool, random_registry, random_stub_workflow,
    reference_chain_energies, rng,
};
use coursegate::curriculum::{
    aggregate, check_track, classify_scale, costs_equal, plan_track, track_cost, CourseTrack,
    PrereqGraph,
};
use coursegate::executor::chain::{ChainParams, HarmonicChain};
use coursegate::executor::{
    check_artifacts, check_dependency_order, check_slot_limits, plan_execution, ExecutionRecord,
    Executor, ExecutorConfig, Policy, RunInputs, RunStatus,
};
use coursegate::registry::{validate_meta, Duration as Minutes, Registry, ScaleLevel};
use coursegate::workflow::{builtin_tools, derive_subset, topo_layers, validate_workflow};
use coursegate::fixtures;
use coursegate_service::{api, Store};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table1_fidelity() -> Outcome {
    let modules = fixtures::table1_fixture_set();
    let known: BTreeSet<_> = modules.iter().map(|m| m.id.clone()).collect();
    let table1 = fixtures::table1_module();
    let report = validate_meta(&table1, &known);
    ensure(report.is_empty(), || format!("fixture report not empty:\n{report}"))?;

    let two_weeks = Minutes::from_weeks(2).unwrap();
    ensure(table1.duration == two_weeks, || format!("duration {}", table1.duration))?;
    ensure(table1.scale == ScaleLevel::Mini, || format!("declared scale {}", table1.scale))?;
    let classified = classify_scale(two_weeks);
    ensure(classified == ScaleLevel::Mini, || format!("classify_scale(2 weeks) = {classified}"))?;

    let track = CourseTrack::new("table1", "Table 1", vec![table1.id.clone()]);
    let agg = aggregate(&track, modules.as_slice()).map_err(|e| e.to_string())?;
    let hours = (agg.workload_hours.min_hours, agg.workload_hours.max_hours);
    ensure(hours == (16.0, 20.0), || format!("aggregate workload {hours:?}"))?;
    Ok("zero findings, mini, [16, 20] h".into())
}

fn scale_classification() -> Outcome {
    let cases = [
        (Minutes::from_minutes(10), ScaleLevel::Nano),
        (Minutes::from_minutes(30), ScaleLevel::Nano),
        (Minutes::from_hours(1), ScaleLevel::Micro),
        (Minutes::from_hours(8), ScaleLevel::Micro),
        (Minutes::from_days(1), ScaleLevel::Mini),
        (Minutes::from_days(14), ScaleLevel::Mini),
        (Minutes::from_months(1), ScaleLevel::Macro),
        (Minutes::from_months(6), ScaleLevel::Macro),
    ];
    for (d, expected) in cases {
        let d = d.unwrap();
        let got = classify_scale(d);
        ensure(got == expected, || format!("{d}: {got}, expected {expected}"))?;
    }
    let mut r = rng(0x5ca1e);
    let mut durations: Vec<u64> = (0..10_000).map(|_| r.gen_range(1..=400_000)).collect();
    durations.sort_unstable();
    let levels: Vec<ScaleLevel> = durations
        .iter()
        .map(|&m| classify_scale(Minutes::from_minutes(m).unwrap()))
        .collect();
    for (i, w) in levels.windows(2).enumerate() {
        ensure(w[0] <= w[1], || {
            format!("{} min -> {}, {} min -> {}", durations[i], w[0], durations[i + 1], w[1])
        })?;
    }
    Ok("8 reference durations, 10000 monotone".into())
}

fn planner_oracle() -> Outcome {
    let mut planned = 0;
    let mut unsatisfiable = 0;
    for seed in 0..200u64 {
        let mut r = rng(0x91a2 + seed);
        let n = r.gen_range(1..=10);
        let modules = random_module_dag(&mut r, n);
        let target = modules[r.gen_range(0..n)].id.clone();
        let constraints = random_constraints(&mut r);
        let graph = PrereqGraph::build(&modules).map_err(|e| format!("seed {seed}: {e}"))?;
        let oracle = exhaustive_min_cost(&modules, target.as_str(), constraints.as_ref());
        match (oracle, plan_track(target.as_str(), &graph, constraints.as_ref())) {
            (Some(best), Ok(track)) => {
                let cost = track_cost(&track, &graph);
                ensure(costs_equal(cost, best), || {
                    format!("seed {seed}: planner {cost}, oracle {best}")
                })?;
                let report = check_track(&track, &graph, constraints.as_ref())
                    .map_err(|e| format!("seed {seed}: {e}"))?;
                ensure(report.is_empty(), || format!("seed {seed}: {report}"))?;
                planned += 1;
            }
            (None, Err(_)) => unsatisfiable += 1,
            (o, p) => return Err(format!("seed {seed}: oracle {o:?}, planner {p:?}")),
        }
    }
    Ok(format!("200/200 agree ({planned} planned, {unsatisfiable} infeasible)"))
}

fn pipelines() -> Outcome {
    let tools = builtin_tools();
    for n in 1..=3 {
        let report = validate_workflow(&fixtures::pipeline(n), &tools);
        ensure(report.is_empty(), || format!("pipeline-{n}:\n{report}"))?;
    }
    let subset = derive_subset(&fixtures::pipeline(3), &["lammps", "r"]).map_err(|e| e.to_string())?;
    ensure(subset.structurally_eq(&fixtures::pipeline(1)), || {
        format!("subset {subset:?} differs from pipeline-1")
    })?;
    let layers = topo_layers(&fixtures::pipeline(2)).map_err(|e| e.to_string())?;
    let expected = [vec!["lammps"], vec!["atomeye", "r"], vec!["ffmpeg"]];
    ensure(layers == expected, || format!("layers {layers:?}"))?;
    Ok("3 valid, subset = pipeline-1, 3 layers".into())
}

fn artifact_bytes(record: &ExecutionRecord) -> BTreeMap<(String, String), Vec<u8>> {
    record
        .artifacts
        .iter()
        .map(|a| ((a.producer.node.clone(), a.producer.port.clone()), a.bytes.clone()))
        .collect()
}

fn executor_determinism() -> Outcome {
    let executors: Vec<(usize, Executor)> = [1, 4]
        .into_iter()
        .map(|workers| {
            let config = ExecutorConfig {
                worker_limit: workers,
                runs_dir: None,
            };
            (workers, Executor::with_config(adapters_with_mix(), config))
        })
        .collect();
    let mut nodes = 0;
    for case in 0..100u64 {
        let mut r = rng(0xe7ec + case);
        let n = r.gen_range(1..=12);
        let wf = if r.gen_bool(0.5) {
            random_mix_workflow(&mut r, n)
        } else {
            random_stub_workflow(&mut r, n)
        };
        let pool = random_pool(&mut r);
        let policy = if r.gen_bool(0.5) { Policy::RoundRobin } else { Policy::FastestFit };
        let seed: u64 = r.gen();
        let plan = plan_execution(&wf, &pool, policy).map_err(|e| format!("case {case}: {e}"))?;

        let mut reference: Option<ExecutionRecord> = None;
        for (workers, ex) in &executors {
            // Two runs per setting: replay within and across worker limits.
            for _ in 0..2 {
                let rec = ex
                    .execute(&wf, &plan, RunInputs::new(), seed)
                    .map_err(|e| format!("case {case}: {e}"))?;
                let at = |what: String| format!("case {case}, workers {workers}: {what}");
                ensure(rec.status == RunStatus::Succeeded, || at(format!("{:?}", rec.status)))?;
                check_dependency_order(&rec, &wf).map_err(at)?;
                check_slot_limits(&rec, &pool).map_err(at)?;
                check_artifacts(&rec).map_err(at)?;
                if let Some(first) = &reference {
                    ensure(artifact_bytes(first) == artifact_bytes(&rec), || {
                        at("artifact bytes differ from first run".into())
                    })?;
                    ensure(first.schedule() == rec.schedule(), || at("schedule differs".into()))?;
                } else {
                    reference = Some(rec);
                }
            }
        }
        nodes += n;
    }
    Ok(format!("100 cases, {nodes} nodes, worker limits 1 and 4"))
}

fn integrator() -> Outcome {
    let params = ChainParams {
        n_particles: 32,
        steps: 1000,
        dt: 0.01,
        strain_rate: 0.0,
        velocity_scale: 0.5,
    };
    let mut worst_drift: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for seed in [1u64, 42, 2024] {
        let mut chain = HarmonicChain::new(params, seed);
        let reference = reference_chain_energies(&chain.velocities, params.steps, params.dt);
        let e0 = chain.sample().total_energy();
        ensure(e0 > 0.0, || format!("seed {seed}: zero initial energy"))?;
        worst_gap = worst_gap.max((e0 - reference[0]).abs());
        for expected in reference.iter().skip(1) {
            chain.advance();
            let e = chain.sample().total_energy();
            worst_drift = worst_drift.max((e - e0).abs() / e0);
            worst_gap = worst_gap.max((e - expected).abs());
        }
    }
    ensure(worst_drift < 1e-3, || format!("relative drift {worst_drift:e}"))?;
    ensure(worst_gap < 1e-9, || format!("max gap to reference {worst_gap:e}"))?;
    Ok(format!("drift {worst_drift:.2e}, max gap {worst_gap:.2e}"))
}

fn round_trips() -> Outcome {
    for seed in 0..100u64 {
        let reg = random_registry(&mut rng(0xa2c + seed));
        let first = reg.export_repository();
        let fresh = Registry::new();
        fresh.import_repository(&first).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(fresh.export_repository() == first, || format!("seed {seed}: bytes differ"))?;
    }

    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let compared = runtime.block_on(restart_preserves_gets())?;
    Ok(format!("100 archives byte-identical, {compared} GETs equal after restart"))
}

async fn get_all(store: Arc<Store>) -> Result<Vec<(String, u16, Vec<u8>)>, String> {
    use axum::body::Body;
    use axum::http::Request;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let app = api::router(store.clone());
    let mut uris = vec![
        "/v1/modules".to_string(),
        "/v1/workflows".to_string(),
        "/v1/repo/export".to_string(),
        "/v1/graph".to_string(),
    ];
    uris.extend(store.list_modules().iter().map(|m| format!("/v1/modules/{}", m.id)));
    for run in store.run_ids() {
        uris.push(format!("/v1/runs/{run}"));
        for a in store.run_status(&run).map_err(|e| e.to_string())?.artifacts {
            uris.push(format!("/v1/runs/{run}/artifacts/{}/{}", a.node, a.port));
        }
    }
    let mut out = Vec::new();
    for uri in uris {
        let req = Request::get(&uri).body(Body::empty()).map_err(|e| e.to_string())?;
        let resp = app.clone().oneshot(req).await.map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes();
        out.push((uri, status, body.to_vec()));
    }
    Ok(out)
}

async fn restart_preserves_gets() -> Result<usize, String> {
    let mut compared = 0;
    for seed in 0..10u64 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut r = rng(0x5e55 + seed);
        let before = {
            let store = Arc::new(Store::open(dir.path(), Some(2)).map_err(|e| e.to_string())?);
            let source = random_registry(&mut r);
            store
                .import_repository(&source.export_repository())
                .map_err(|e| e.to_string())?;
            for m in store.list_modules().iter().take(3) {
                store.rate_module(m.id.as_str(), r.gen_range(1..=5)).map_err(|e| e.to_string())?;
            }
            let n = r.gen_range(1..=6);
            let wf = random_stub_workflow(&mut r, n);
            let pool = random_pool(&mut r);
            let req = coursegate_service::RunRequest {
                workflow: Some(wf),
                pool: Some(pool),
                seed: r.gen(),
                ..Default::default()
            };
            let snap = store.submit_run(req).map_err(|e| e.to_string())?;
            store.wait_run(&snap.run_id).map_err(|e| e.to_string())?;
            get_all(store).await?
        };
        let store = Arc::new(Store::open(dir.path(), Some(2)).map_err(|e| e.to_string())?);
        let after = get_all(store).await?;
        ensure(before == after, || format!("seed {seed}: GET responses differ after restart"))?;
        compared += before.len();
    }
    Ok(compared)
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion { name: "table1-fidelity", limit: Duration::from_secs(1), run: table1_fidelity },
        Criterion { name: "scale-classification", limit: Duration::from_secs(1), run: scale_classification },
        Criterion { name: "planner-oracle", limit: Duration::from_secs(60), run: planner_oracle },
        Criterion { name: "pipeline-reproduction", limit: Duration::from_secs(1), run: pipelines },
        Criterion { name: "executor-determinism", limit: Duration::from_secs(120), run: executor_determinism },
        Criterion { name: "stub-integrator", limit: Duration::from_secs(10), run: integrator },
        Criterion { name: "round-trips", limit: Duration::from_secs(30), run: round_trips },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let verdict = match outcome {
            Ok(detail) if elapsed <= c.limit => Ok(detail),
            Ok(detail) => Err(format!("{detail}; over time limit {:?}", c.limit)),
            Err(why) => Err(why),
        };
        match &verdict {
            Ok(detail) => println!("PASS {:<22} {:>9.3}s  {detail}", c.name, elapsed.as_secs_f64()),
            Err(why) => {
                println!("FAIL {:<22} {:>9.3}s  {why}", c.name, elapsed.as_secs_f64());
                failed.push(c.name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
