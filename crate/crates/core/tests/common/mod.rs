//! Generators and independent oracles shared by the integration tests.
//!
//! Generators take an explicit RNG so every failure is reproducible from the
//! seed printed by the caller.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use coursegate::curriculum::TrackConstraints;
use coursegate::executor::{
    AdapterError, AdapterErrorKind, AdapterRegistry, AdapterSpec, Outputs, Resource, ResourceKind,
    RunContext, ToolAdapter,
};
use coursegate::registry::{
    Duration, ModuleId, ModuleKind, ModuleMeta, Price, RatingAggregate, Registry, ScaleLevel,
    WorkloadRange,
};
use coursegate::workflow::{CrateNode, Workflow};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sha2::{Digest, Sha256};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn id(s: &str) -> ModuleId {
    ModuleId::new(s).unwrap()
}

// ---------------------------------------------------------------- modules

/// Random prerequisite DAG on `n` modules `m00..`: edges only point to
/// lower indices, some symmetric alternative pairs, mixed costs.
pub fn random_module_dag(rng: &mut ChaCha8Rng, n: usize) -> Vec<ModuleMeta> {
    let mut modules = Vec::with_capacity(n);
    for i in 0..n {
        let weeks = rng.gen_range(1..=4);
        let lo = rng.gen_range(1..=8) as f64;
        let hi = lo + rng.gen_range(0..=4) as f64;
        let duration = Duration::from_weeks(weeks).unwrap();
        let mut m = ModuleMeta::new(
            id(&format!("m{i:02}")),
            format!("Module {i}"),
            coursegate::curriculum::classify_scale(duration),
            duration,
            WorkloadRange::new(lo, hi),
        );
        m.complexity = rng.gen_range(1..=5);
        for j in 0..i {
            if rng.gen_bool(0.3) {
                m.previous.push(id(&format!("m{j:02}")));
            }
        }
        if i > 0 && rng.gen_bool(0.15) {
            let j = rng.gen_range(0..n);
            if j != i {
                m.alternatives.push(id(&format!("m{j:02}")));
            }
        }
        modules.push(m);
    }
    modules
}

pub fn random_constraints(rng: &mut ChaCha8Rng) -> Option<TrackConstraints> {
    if rng.gen_bool(0.5) {
        return None;
    }
    let mut c = TrackConstraints::default();
    if rng.gen_bool(0.5) {
        c.max_complexity = Some(rng.gen_range(2..=5));
    }
    if rng.gen_bool(0.5) {
        c.max_total_minutes = Some(Duration::from_weeks(rng.gen_range(2..=20)).unwrap());
    }
    Some(c)
}

const WORDS: &[&str] = &[
    "lammps", "diffusion", "plasticity", "crystal", "statistics", "fourier", "monte", "carlo",
    "dislocation", "nano", "grain", "phonon", "visualization", "python", "fortran",
];
const CATEGORIES: &[&str] = &[
    "Physics:Computational Physics",
    "Physics:Solid State",
    "Materials Science:Metals",
    "Computer Science:HPC",
    "Mathematics",
];

fn random_words(rng: &mut ChaCha8Rng, max: usize) -> Vec<String> {
    let k = rng.gen_range(0..=max);
    WORDS.choose_multiple(rng, k).map(|w| w.to_string()).collect()
}

/// A valid, fully populated module with optional unknown fields.
pub fn random_module(rng: &mut ChaCha8Rng, slug: &str, earlier: &[ModuleId]) -> ModuleMeta {
    let duration = match rng.gen_range(0..4) {
        0 => Duration::from_minutes(rng.gen_range(5..=30)),
        1 => Duration::from_hours(rng.gen_range(1..=8)),
        2 => Duration::from_days(rng.gen_range(1..=14)),
        _ => Duration::from_months(rng.gen_range(1..=6)),
    }
    .unwrap();
    let lo = rng.gen_range(1..=40) as f64 / 2.0;
    let hi = lo + rng.gen_range(0..=10) as f64 / 4.0;
    let scale = if rng.gen_bool(0.9) {
        coursegate::curriculum::classify_scale(duration)
    } else {
        *ScaleLevel::ALL.choose(rng).unwrap()
    };
    let mut m = ModuleMeta::new(
        id(slug),
        format!("{} {}", slug.replace('-', " "), WORDS.choose(rng).unwrap()),
        scale,
        duration,
        WorkloadRange::new(lo, hi),
    );
    m.complexity = rng.gen_range(1..=5);
    m.exercises = rng.gen_range(0..50);
    m.keywords = random_words(rng, 4);
    let n_categories = rng.gen_range(0..=2);
    m.categories = CATEGORIES
        .choose_multiple(rng, n_categories)
        .map(|c| c.to_string())
        .collect();
    if rng.gen_bool(0.3) {
        m.languages.push(["German", "Ukrainian", "Spanish"].choose(rng).unwrap().to_string());
    }
    let votes: Vec<u8> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(1..=5)).collect();
    m.rating = RatingAggregate::from_votes(&votes);
    m.certificate = rng.gen_bool(0.4);
    let cents: i64 = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(1..100_000) };
    m.price = format!("{}.{:02}", cents / 100, cents % 100).parse::<Price>().unwrap();
    m.kind = if rng.gen_bool(0.5) { ModuleKind::Passive } else { ModuleKind::Active };
    for e in earlier {
        if rng.gen_bool(0.2) {
            m.previous.push(e.clone());
        }
    }
    if rng.gen_bool(0.2) {
        m.next.push(id(&format!("future-{}", rng.gen_range(0..5))));
    }
    if rng.gen_bool(0.3) {
        m.extra.insert("x-syllabus-url".into(), json!(format!("https://example.org/{slug}")));
    }
    if rng.gen_bool(0.2) {
        m.extra.insert(
            "x-review".into(),
            json!({"by": "committee", "score": rng.gen_range(0..10), "ratio": 0.25}),
        );
    }
    m
}

/// Random registry with 0..12 modules and sometimes a workflow.
pub fn random_registry(rng: &mut ChaCha8Rng) -> Registry {
    let year = rng.gen_range(2000..2030);
    let reg = Registry::with_created_at(format!("{year}-0{}-1{}T08:30:00Z", rng.gen_range(1..10), rng.gen_range(0..10)));
    let n = rng.gen_range(0..12);
    let mut ids = Vec::new();
    for i in 0..n {
        let slug = format!("mod-{i}-{}", rng.gen_range(0..1000));
        let m = random_module(rng, &slug, &ids);
        ids.push(reg.register_module(m).unwrap());
    }
    if !ids.is_empty() && rng.gen_bool(0.5) {
        let mut wf = coursegate::fixtures::pipeline(rng.gen_range(1..=3));
        wf.owning_module = Some(ids.choose(rng).unwrap().clone());
        reg.add_workflow(wf).unwrap();
    }
    reg
}

// ---------------------------------------------------------------- planner oracle

fn module_cost(m: &ModuleMeta) -> f64 {
    let weeks = m.duration.minutes() as f64 / (7.0 * 24.0 * 60.0);
    weeks * (m.workload.min_hours_per_week + m.workload.max_hours_per_week) / 2.0
}

/// Minimum cost over every module subset that contains `target` and can be
/// ordered with `target` last so each prerequisite is met by an earlier
/// module or one of its declared alternatives. `None` when no subset works.
pub fn exhaustive_min_cost(
    modules: &[ModuleMeta],
    target: &str,
    constraints: Option<&TrackConstraints>,
) -> Option<f64> {
    let n = modules.len();
    assert!(n <= 16, "exhaustive oracle is exponential");
    let index: BTreeMap<&str, usize> = modules.iter().enumerate().map(|(i, m)| (m.id.as_str(), i)).collect();
    let t = index[target];
    let mut alts: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, m) in modules.iter().enumerate() {
        for a in &m.alternatives {
            if let Some(&j) = index.get(a.as_str()) {
                alts[i].insert(j);
                alts[j].insert(i);
            }
        }
    }
    let admitted: Vec<bool> = modules
        .iter()
        .map(|m| constraints.is_none_or(|c| c.admits(m)))
        .collect();
    let met = |placed: u32, required: &ModuleId| -> bool {
        match index.get(required.as_str()) {
            None => false,
            Some(&r) => placed & (1 << r) != 0 || alts[r].iter().any(|&a| placed & (1 << a) != 0),
        }
    };

    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        if mask & (1 << t) == 0 {
            continue;
        }
        if (0..n).any(|i| mask & (1 << i) != 0 && !admitted[i]) {
            continue;
        }
        let minutes: u64 = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| modules[i].duration.minutes())
            .sum();
        if let Some(max) = constraints.and_then(|c| c.max_total_minutes) {
            if minutes > max.minutes() {
                continue;
            }
        }
        // Placing a module never un-meets a prerequisite, so greedy placement
        // of everything but the target decides feasibility.
        let mut placed = 0u32;
        let others = mask & !(1 << t);
        loop {
            let next = (0..n).find(|&i| {
                others & (1 << i) != 0
                    && placed & (1 << i) == 0
                    && modules[i].previous.iter().all(|p| met(placed, p))
            });
            match next {
                Some(i) => placed |= 1 << i,
                None => break,
            }
        }
        if placed != others || !modules[t].previous.iter().all(|p| met(placed, p)) {
            continue;
        }
        let cost: f64 = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| module_cost(&modules[i]))
            .sum();
        if best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
    }
    best
}

// ---------------------------------------------------------------- integrator oracle

/// Plain velocity Verlet for a chain with both ends held fixed. Returns the
/// total energy after each step, starting with step 0.
pub fn reference_chain_energies(initial_velocities: &[f64], steps: u64, dt: f64) -> Vec<f64> {
    let n = initial_velocities.len();
    let mut x: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mut v = initial_velocities.to_vec();
    let force = |x: &[f64]| -> Vec<f64> {
        let mut f = vec![0.0; n];
        for i in 1..n - 1 {
            f[i] = x[i + 1] - 2.0 * x[i] + x[i - 1];
        }
        f
    };
    let energy = |x: &[f64], v: &[f64]| -> f64 {
        let mut e = v.iter().fold(0.0, |acc, vi| acc + 0.5 * vi * vi);
        for i in 0..n - 1 {
            let d = x[i + 1] - x[i] - 1.0;
            e += 0.5 * d * d;
        }
        e
    };
    let mut f = force(&x);
    let mut out = vec![energy(&x, &v)];
    for _ in 0..steps {
        for i in 1..n - 1 {
            x[i] += dt * v[i] + 0.5 * dt * dt * f[i];
        }
        let f_new = force(&x);
        for i in 1..n - 1 {
            v[i] += 0.5 * dt * (f[i] + f_new[i]);
        }
        f = f_new;
        out.push(energy(&x, &v));
    }
    out
}

// ---------------------------------------------------------------- workflows

pub const BLOB: &str = "blob";
pub const MIX_TOOL: &str = "mix";

/// Test adapter: any number of `blob` inputs, one `blob` output holding a
/// hash of seed, parameters and inputs. Fails when parameter `fail` is set.
pub struct MixAdapter {
    spec: AdapterSpec,
}

impl MixAdapter {
    pub fn new() -> Self {
        Self {
            spec: AdapterSpec::new(MIX_TOOL, &[BLOB], &[BLOB]),
        }
    }
}

impl ToolAdapter for MixAdapter {
    fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    fn run(&self, ctx: &RunContext<'_>) -> Result<Outputs, AdapterError> {
        if ctx.parameters.contains_key("fail") {
            return Err(AdapterError::new(AdapterErrorKind::ToolFailed, "asked to fail"));
        }
        let mut h = Sha256::new();
        h.update(ctx.seed.to_le_bytes());
        for (k, v) in ctx.parameters {
            h.update(k.as_bytes());
            h.update(v.as_bytes());
        }
        for (port, input) in &ctx.inputs {
            h.update(port.as_bytes());
            h.update(input.bytes);
        }
        let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Ok([(BLOB.to_string(), format!("{}:{hex}\n", ctx.node_id).into_bytes())].into())
    }
}

pub fn adapters_with_mix() -> AdapterRegistry {
    let mut reg = AdapterRegistry::with_builtins();
    reg.register(Arc::new(MixAdapter::new()));
    reg
}

/// Random DAG of `mix` nodes; node `i` may take inputs from any earlier
/// node. `steps` varies so simulated costs differ.
pub fn random_mix_workflow(rng: &mut ChaCha8Rng, n: usize) -> Workflow {
    let mut wf = Workflow::new(format!("mix-{n}"), "random mix");
    for i in 0..n {
        let mut node = CrateNode::new(format!("n{i:02}"), MIX_TOOL)
            .with_output("out", BLOB)
            .with_param("steps", &rng.gen_range(1..=20).to_string());
        let mut sources = Vec::new();
        for j in 0..i {
            if rng.gen_bool(0.25) && sources.len() < 3 {
                sources.push(j);
            }
        }
        for (k, _) in sources.iter().enumerate() {
            node = node.with_input(&format!("in{k}"), BLOB);
        }
        wf = wf.with_node(node);
        for (k, j) in sources.iter().enumerate() {
            wf = wf.with_link((&format!("n{j:02}"), "out"), (&format!("n{i:02}"), &format!("in{k}")));
        }
    }
    wf
}

/// Random pipeline of built-in stubs: lammps sources feeding r, atomeye and
/// debyer; ffmpeg after atomeye.
pub fn random_stub_workflow(rng: &mut ChaCha8Rng, n: usize) -> Workflow {
    let mut wf = Workflow::new(format!("stubs-{n}"), "random stubs");
    let mut trajectories = Vec::new();
    let mut frames = Vec::new();
    for i in 0..n {
        let name = format!("s{i:02}");
        let roll = rng.gen_range(0..5);
        let node = if trajectories.is_empty() || roll == 0 {
            trajectories.push(name.clone());
            CrateNode::new(&name, "lammps-stub")
                .with_output("trajectory", "trajectory-table")
                .with_param("n_particles", &rng.gen_range(2..=12).to_string())
                .with_param("steps", &rng.gen_range(1..=60).to_string())
                .with_param("velocity_scale", "0.3")
        } else if roll == 4 && !frames.is_empty() {
            let src: &String = frames.choose(rng).unwrap();
            let node = CrateNode::new(&name, "ffmpeg-stub")
                .with_input("frames", "frame-list")
                .with_output("video", "video");
            wf = wf.with_link((src, "frames"), (&name, "frames"));
            node
        } else {
            let src: String = trajectories.choose(rng).unwrap().clone();
            let node = match roll {
                1 => CrateNode::new(&name, "r-stub").with_output("plot", "plot-data"),
                2 => {
                    frames.push(name.clone());
                    CrateNode::new(&name, "atomeye-stub")
                        .with_output("frames", "frame-list")
                        .with_param("every", &rng.gen_range(1..=10).to_string())
                }
                _ => CrateNode::new(&name, "debyer-stub")
                    .with_output("histogram", "histogram")
                    .with_param("bins", &rng.gen_range(1..=8).to_string()),
            }
            .with_input("trajectory", "trajectory-table");
            wf = wf.with_link((&src, "trajectory"), (&name, "trajectory"));
            node
        };
        wf = wf.with_node(node);
    }
    wf
}

pub fn random_pool(rng: &mut ChaCha8Rng) -> Vec<Resource> {
    let kinds = [
        ResourceKind::Pc,
        ResourceKind::Cluster,
        ResourceKind::ServiceGrid,
        ResourceKind::DesktopGrid,
        ResourceKind::Cloud,
    ];
    (0..rng.gen_range(1..=4))
        .map(|i| {
            Resource::new(
                format!("r{i}"),
                *kinds.choose(rng).unwrap(),
                rng.gen_range(1..=3),
                [0.25, 0.5, 1.0, 1.5, 2.0][rng.gen_range(0..5)],
            )
        })
        .collect()
}
