use std::process::ExitCode;

use clap::Parser;
use coursegate_service::cli::{self, Cli};

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match cli::execute(cli, &mut std::io::stdout().lock()) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("{e}");
            if let Some(report) = &e.details {
                eprintln!("{report}");
            }
            ExitCode::from(2)
        }
    }
}
