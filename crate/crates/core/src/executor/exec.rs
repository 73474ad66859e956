//! Adapter that runs an external program, for substituting real tools.
//!
//! The program runs in a fresh temporary directory containing:
//!
//! * `in/<port>`: one file per staged input,
//! * `script`: the bound script, if any,
//! * `out/`: where the program must leave one file per declared output kind.
//!
//! Parameters are passed as `COURSEGATE_PARAM_<NAME>` environment variables
//! (name upper-cased) and the node seed as `COURSEGATE_SEED`. Arguments equal
//! to `{workdir}` are replaced by the directory path. Determinism is the
//! wrapped program's responsibility.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use super::adapter::{AdapterError, AdapterErrorKind, AdapterSpec, Outputs, RunContext, ToolAdapter};

#[derive(Debug, Clone)]
pub struct ExecAdapter {
    spec: AdapterSpec,
    program: PathBuf,
    args: Vec<String>,
}

impl ExecAdapter {
    pub fn new(spec: AdapterSpec, program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        Self {
            spec,
            program: program.into(),
            args,
        }
    }
}

fn io_failure(context: &str, err: std::io::Error) -> AdapterError {
    AdapterError::new(AdapterErrorKind::ToolFailed, format!("{context}: {err}"))
}

impl ToolAdapter for ExecAdapter {
    fn spec(&self) -> &AdapterSpec {
        &self.spec
    }

    fn run(&self, ctx: &RunContext<'_>) -> Result<Outputs, AdapterError> {
        let work = tempfile::tempdir().map_err(|e| io_failure("temporary directory", e))?;
        let in_dir = work.path().join("in");
        let out_dir = work.path().join("out");
        fs::create_dir_all(&in_dir).map_err(|e| io_failure("create in/", e))?;
        fs::create_dir_all(&out_dir).map_err(|e| io_failure("create out/", e))?;
        for (port, input) in &ctx.inputs {
            fs::write(in_dir.join(port), input.bytes).map_err(|e| io_failure("stage input", e))?;
        }
        if let Some(script) = ctx.script {
            fs::write(work.path().join("script"), &script.content)
                .map_err(|e| io_failure("stage script", e))?;
        }

        let workdir = work.path().to_string_lossy().into_owned();
        let mut cmd = Command::new(&self.program);
        cmd.current_dir(work.path())
            .args(self.args.iter().map(|a| if a == "{workdir}" { workdir.as_str() } else { a }))
            .env("COURSEGATE_SEED", ctx.seed.to_string());
        for (name, value) in ctx.parameters {
            cmd.env(format!("COURSEGATE_PARAM_{}", name.to_uppercase()), value);
        }
        let output = cmd.output().map_err(|e| io_failure("spawn", e))?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(AdapterError::new(
                AdapterErrorKind::ToolFailed,
                format!("{} exited with {}: {}", self.program.display(), output.status, stderr.trim()),
            ));
        }

        let mut outputs = Outputs::new();
        for kind in &self.spec.outputs {
            let bytes = fs::read(out_dir.join(kind))
                .map_err(|e| io_failure(&format!("read out/{kind}"), e))?;
            outputs.insert(kind.clone(), bytes);
        }
        Ok(outputs)
    }
}
