//! The `coursegate` command line. Commands act on the data directory
//! directly, through the same [`Store`] operations the HTTP API uses.

use std::fs;
use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use coursegate::curriculum::{CourseTrack, TrackConstraints};
use coursegate::executor::{Resource, RunStatus};
use coursegate::registry::{Duration, ModuleMeta, ScaleLevel, SearchQuery};
use coursegate::workflow::{self, Workflow};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::ApiError;
use crate::server::{self, ServeConfig, DEFAULT_PORT};
use crate::store::{PlanRequest, RunRequest, Store};

#[derive(Debug, Parser)]
#[command(name = "coursegate", version, about = "Course module registry, track planner and workflow runner")]
pub struct Cli {
    /// Directory holding repository.json and run records.
    #[arg(long, global = true, env = "COURSEGATE_DATA_DIR", default_value = "coursegate-data")]
    pub data_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Register, validate and search course modules.
    #[command(subcommand)]
    Module(ModuleCmd),
    /// Export or import the canonical repository archive.
    #[command(subcommand)]
    Repo(RepoCmd),
    /// Plan, check and total course tracks.
    #[command(subcommand)]
    Track(TrackCmd),
    /// Inspect workflow files.
    #[command(subcommand)]
    Wf(WfCmd),
    /// Execute workflows and fetch their artifacts.
    #[command(subcommand)]
    Run(RunCmd),
    /// Render the prerequisite graph.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum ModuleCmd {
    Add { file: PathBuf },
    Validate { file: PathBuf },
    Search {
        /// Repeatable; every keyword must match.
        #[arg(long)]
        keyword: Vec<String>,
        #[arg(long)]
        scale: Option<ScaleLevel>,
        #[arg(long)]
        category: Option<String>,
        #[arg(long)]
        language: Option<String>,
        #[arg(long)]
        max_complexity: Option<u8>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RepoCmd {
    Export { path: PathBuf },
    Import { path: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum TrackCmd {
    Plan {
        #[arg(long)]
        target: String,
        #[arg(long)]
        max_minutes: Option<u64>,
        #[arg(long)]
        max_complexity: Option<u8>,
        #[arg(long)]
        language: Option<String>,
    },
    Check { file: PathBuf },
    Aggregate { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum WfCmd {
    Validate { file: PathBuf },
    Layers { file: PathBuf },
    Subset {
        file: PathBuf,
        /// Comma-separated node ids.
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<String>,
    },
    /// Store a workflow in the repository.
    Add { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum RunCmd {
    /// Runs to completion and prints the final status.
    Submit {
        workflow: PathBuf,
        /// JSON list of {id, kind, slots, speed_factor}; defaults to the shipped pool.
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long, default_value = "round_robin")]
        policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Status { id: String },
    Cancel { id: String },
    Artifacts {
        id: String,
        #[arg(long)]
        node: String,
        #[arg(long)]
        port: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum GraphCmd {
    Dot,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "COURSEGATE_PORT", default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long)]
    pub worker_limit: Option<usize>,
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

/// What a successful command found. Reports with errors map to exit code 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Findings,
}

impl Outcome {
    fn of(report: &coursegate::ValidationReport) -> Self {
        if report.has_errors() {
            Self::Findings
        } else {
            Self::Clean
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Self::Clean => 0,
            Self::Findings => 1,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, ApiError> {
    fs::read(path).map_err(|e| ApiError::bad_request(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ApiError> {
    serde_json::from_slice(&read(path)?)
        .map_err(|e| ApiError::bad_request(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), ApiError> {
    fs::write(path, bytes)
        .map_err(|e| ApiError::new("STORAGE_FAILED", format!("cannot write {}: {e}", path.display())))
}

fn print<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), ApiError> {
    let text = serde_json::to_string_pretty(value).expect("CLI values always serialize");
    writeln!(out, "{text}").map_err(|e| ApiError::new("STORAGE_FAILED", e.to_string()))
}

fn read_workflow(path: &Path) -> Result<Workflow, ApiError> {
    Ok(workflow::deserialize_workflow(&read(path)?)?)
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<Outcome, ApiError> {
    if let Command::Serve(args) = &cli.command {
        return serve(&cli.data_dir, args, out);
    }
    let store = Store::open(&cli.data_dir, None)?;
    match cli.command {
        Command::Module(cmd) => module(&store, cmd, out),
        Command::Repo(cmd) => repo(&store, cmd, out),
        Command::Track(cmd) => track(&store, cmd, out),
        Command::Wf(cmd) => wf(&store, cmd, out),
        Command::Run(cmd) => run(&store, cmd, out),
        Command::Graph(GraphCmd::Dot) => {
            let dot = store.graph()?.to_dot();
            write!(out, "{dot}").map_err(|e| ApiError::new("STORAGE_FAILED", e.to_string()))?;
            Ok(Outcome::Clean)
        }
        Command::Serve(_) => unreachable!("handled above"),
    }
}

fn module(store: &Store, cmd: ModuleCmd, out: &mut dyn Write) -> Result<Outcome, ApiError> {
    match cmd {
        ModuleCmd::Add { file } => {
            let meta: ModuleMeta = read_json(&file)?;
            let id = store.register_module(meta)?;
            writeln!(out, "{id}").ok();
            Ok(Outcome::Clean)
        }
        ModuleCmd::Validate { file } => {
            let meta: ModuleMeta = read_json(&file)?;
            let report = store.validate_module(&meta);
            print(out, &report)?;
            Ok(Outcome::of(&report))
        }
        ModuleCmd::Search {
            keyword,
            scale,
            category,
            language,
            max_complexity,
        } => {
            let query = SearchQuery {
                keywords: keyword,
                category_prefix: category,
                scale,
                language,
                max_complexity,
            };
            let ids: Vec<String> = store
                .search_modules(&query)
                .into_iter()
                .map(|m| m.id.to_string())
                .collect();
            print(out, &ids)?;
            Ok(Outcome::Clean)
        }
    }
}

fn repo(store: &Store, cmd: RepoCmd, out: &mut dyn Write) -> Result<Outcome, ApiError> {
    match cmd {
        RepoCmd::Export { path } => {
            write(&path, &store.export_repository())?;
            Ok(Outcome::Clean)
        }
        RepoCmd::Import { path } => {
            let report = store.import_repository(&read(&path)?)?;
            print(out, &report)?;
            Ok(Outcome::Clean)
        }
    }
}

fn track(store: &Store, cmd: TrackCmd, out: &mut dyn Write) -> Result<Outcome, ApiError> {
    match cmd {
        TrackCmd::Plan {
            target,
            max_minutes,
            max_complexity,
            language,
        } => {
            let max_total_minutes = max_minutes
                .map(Duration::from_minutes)
                .transpose()
                .map_err(|e| ApiError::new("INVALID_CONSTRAINTS", e.to_string()))?;
            let constraints = TrackConstraints {
                max_total_minutes,
                max_complexity,
                allowed_scales: None,
                required_language: language,
            };
            let track = store.plan_track(&PlanRequest {
                target,
                constraints: Some(constraints),
            })?;
            print(out, &track)?;
            Ok(Outcome::Clean)
        }
        TrackCmd::Check { file } => {
            let track: CourseTrack = read_json(&file)?;
            let report = store.check_track(&track, None)?;
            print(out, &report)?;
            Ok(Outcome::of(&report))
        }
        TrackCmd::Aggregate { file } => {
            let track: CourseTrack = read_json(&file)?;
            print(out, &store.aggregate_track(&track)?)?;
            Ok(Outcome::Clean)
        }
    }
}

fn wf(store: &Store, cmd: WfCmd, out: &mut dyn Write) -> Result<Outcome, ApiError> {
    match cmd {
        WfCmd::Validate { file } => {
            let report = store.validate_workflow(&read_workflow(&file)?);
            print(out, &report)?;
            Ok(Outcome::of(&report))
        }
        WfCmd::Layers { file } => {
            print(out, &workflow::topo_layers(&read_workflow(&file)?)?)?;
            Ok(Outcome::Clean)
        }
        WfCmd::Subset { file, keep } => {
            let subset = workflow::derive_subset(&read_workflow(&file)?, &keep)?;
            let bytes = workflow::serialize_workflow(&subset)?;
            out.write_all(&bytes)
                .and_then(|_| writeln!(out))
                .map_err(|e| ApiError::new("STORAGE_FAILED", e.to_string()))?;
            Ok(Outcome::Clean)
        }
        WfCmd::Add { file } => {
            let id = store.add_workflow(read_workflow(&file)?)?;
            writeln!(out, "{id}").ok();
            Ok(Outcome::Clean)
        }
    }
}

fn run(store: &Store, cmd: RunCmd, out: &mut dyn Write) -> Result<Outcome, ApiError> {
    match cmd {
        RunCmd::Submit {
            workflow,
            pool,
            policy,
            seed,
        } => {
            let pool: Option<Vec<Resource>> = pool.map(|p| read_json(&p)).transpose()?;
            let snapshot = store.submit_run(RunRequest {
                workflow: Some(read_workflow(&workflow)?),
                pool,
                policy: Some(policy),
                seed,
                ..RunRequest::default()
            })?;
            let record = store.wait_run(&snapshot.run_id)?;
            let snapshot = record.snapshot();
            print(out, &snapshot)?;
            Ok(if snapshot.status == RunStatus::Succeeded {
                Outcome::Clean
            } else {
                Outcome::Findings
            })
        }
        RunCmd::Status { id } => {
            print(out, &store.run_status(&id)?)?;
            Ok(Outcome::Clean)
        }
        RunCmd::Cancel { id } => {
            print(out, &store.cancel_run(&id)?)?;
            Ok(Outcome::Clean)
        }
        RunCmd::Artifacts { id, node, port, out: path } => {
            let (content_id, bytes) = store.artifact(&id, &node, &port)?;
            write(&path, &bytes)?;
            writeln!(out, "{content_id}").ok();
            Ok(Outcome::Clean)
        }
    }
}

fn serve(data_dir: &Path, args: &ServeArgs, out: &mut dyn Write) -> Result<Outcome, ApiError> {
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| ApiError::new("STORAGE_FAILED", format!("cannot start runtime: {e}")))?;
    runtime.block_on(async {
        let config = ServeConfig {
            host: args.host,
            port: args.port,
            data_dir: data_dir.to_path_buf(),
            worker_limit: args.worker_limit,
            static_dir: args.static_dir.clone(),
        };
        let server = server::serve(config).await?;
        writeln!(out, "listening on http://{}", server.local_addr()).ok();
        out.flush().ok();
        let _ = tokio::signal::ctrl_c().await;
        server.shutdown().await?;
        Ok::<_, ApiError>(Outcome::Clean)
    })
}
