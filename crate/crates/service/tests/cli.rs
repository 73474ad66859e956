use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coursegate::executor::{content_id, RunSnapshot, RunStatus};
use coursegate::workflow::{deserialize_workflow, Workflow};
use coursegate::{fixtures, ValidationReport};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn coursegate(data: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coursegate"))
        .arg("--data-dir")
        .arg(data)
        .args(args)
        .env_remove("COURSEGATE_DATA_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(o: Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        o.status.code(),
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn load_fixture_set(data: &Path, scratch: &Path) {
    for m in fixtures::table1_fixture_set() {
        let file = scratch.join(format!("{}.json", m.id));
        std::fs::write(&file, serde_json::to_vec(&m).unwrap()).unwrap();
        ok(coursegate(data, &["module", "add", arg(&file)]));
    }
}

#[test]
fn module_and_repo_commands() {
    let data = tempfile::tempdir().unwrap();
    let scratch = tempfile::tempdir().unwrap();
    let table1 = fixture("table1-module.json");

    let report: ValidationReport =
        serde_json::from_str(&ok(coursegate(data.path(), &["module", "validate", arg(&table1)]))).unwrap();
    assert!(!report.has_errors());
    assert_eq!(ok(coursegate(data.path(), &["module", "add", arg(&table1)])).trim(), fixtures::TABLE1_ID);

    let again = coursegate(data.path(), &["module", "add", arg(&table1)]);
    assert_eq!(again.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&again.stderr).starts_with("DUPLICATE_ID"));

    let hits: Vec<String> = serde_json::from_str(&ok(coursegate(
        data.path(),
        &["module", "search", "--keyword", "MD", "--scale", "mini"],
    )))
    .unwrap();
    assert_eq!(hits, [fixtures::TABLE1_ID]);

    let archive = scratch.path().join("repo.json");
    ok(coursegate(data.path(), &["repo", "export", arg(&archive)]));
    let other = tempfile::tempdir().unwrap();
    ok(coursegate(other.path(), &["repo", "import", arg(&archive)]));
    let again = scratch.path().join("again.json");
    ok(coursegate(other.path(), &["repo", "export", arg(&again)]));
    assert_eq!(std::fs::read(&archive).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn track_commands() {
    let data = tempfile::tempdir().unwrap();
    let scratch = tempfile::tempdir().unwrap();
    load_fixture_set(data.path(), scratch.path());
    let track = fixture("track.json");

    let report: ValidationReport =
        serde_json::from_str(&ok(coursegate(data.path(), &["track", "check", arg(&track)]))).unwrap();
    assert!(report.is_empty(), "{report}");

    let mut reversed: serde_json::Value = serde_json::from_str(fixtures::TRACK_JSON).unwrap();
    reversed["entries"].as_array_mut().unwrap().reverse();
    let reversed_file = scratch.path().join("reversed.json");
    std::fs::write(&reversed_file, reversed.to_string()).unwrap();
    let out = coursegate(data.path(), &["track", "check", arg(&reversed_file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("PREREQ_UNSATISFIED"));

    let agg: serde_json::Value =
        serde_json::from_str(&ok(coursegate(data.path(), &["track", "aggregate", arg(&track)]))).unwrap();
    assert_eq!(agg["total_minutes"], 3 * 10080);

    let planned: serde_json::Value = serde_json::from_str(&ok(coursegate(
        data.path(),
        &["track", "plan", "--target", fixtures::TABLE1_ID, "--max-complexity", "5"],
    )))
    .unwrap();
    let expected: serde_json::Value = serde_json::from_str(fixtures::TRACK_JSON).unwrap();
    assert_eq!(planned["entries"], expected["entries"]);

    let dot = ok(coursegate(data.path(), &["graph", "dot"]));
    assert!(dot.starts_with("digraph"), "{dot}");
}

#[test]
fn workflow_commands() {
    let data = tempfile::tempdir().unwrap();
    let layers: Vec<Vec<String>> = serde_json::from_str(&ok(coursegate(
        data.path(),
        &["wf", "layers", arg(&fixture("pipeline-2.json"))],
    )))
    .unwrap();
    assert_eq!(layers, [vec!["lammps"], vec!["atomeye", "r"], vec!["ffmpeg"]]);

    let subset = ok(coursegate(
        data.path(),
        &["wf", "subset", arg(&fixture("pipeline-3.json")), "--keep", "lammps,r"],
    ));
    let subset: Workflow = deserialize_workflow(subset.trim().as_bytes()).unwrap();
    assert!(subset.structurally_eq(&fixtures::pipeline(1)));

    ok(coursegate(data.path(), &["wf", "validate", arg(&fixture("pipeline-3.json"))]));
    let out = coursegate(data.path(), &["wf", "subset", arg(&fixture("pipeline-3.json")), "--keep", "r"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("BROKEN_DEPENDENCY"));
}

#[test]
fn run_commands_survive_the_process() {
    let data = tempfile::tempdir().unwrap();
    let scratch = tempfile::tempdir().unwrap();
    let snap: RunSnapshot = serde_json::from_str(&ok(coursegate(
        data.path(),
        &[
            "run",
            "submit",
            arg(&fixture("pipeline-1.json")),
            "--pool",
            arg(&fixture("pool.json")),
            "--policy",
            "round_robin",
            "--seed",
            "42",
        ],
    )))
    .unwrap();
    assert_eq!(snap.status, RunStatus::Succeeded);
    assert_eq!(snap.artifacts.len(), 2);

    // A new process reads the stored record.
    let status: RunSnapshot =
        serde_json::from_str(&ok(coursegate(data.path(), &["run", "status", &snap.run_id]))).unwrap();
    assert_eq!(status, snap);

    let a = &snap.artifacts[0];
    let out = scratch.path().join("artifact");
    let printed = ok(coursegate(
        data.path(),
        &["run", "artifacts", &snap.run_id, "--node", &a.node, "--port", &a.port, "--out", arg(&out)],
    ));
    assert_eq!(printed.trim(), a.id);
    assert_eq!(content_id(&std::fs::read(&out).unwrap()), a.id);

    let cancelled: RunSnapshot =
        serde_json::from_str(&ok(coursegate(data.path(), &["run", "cancel", &snap.run_id]))).unwrap();
    assert_eq!(cancelled.status, RunStatus::Succeeded);

    let missing = coursegate(data.path(), &["run", "status", "nope"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("UNKNOWN_RUN"));
}
