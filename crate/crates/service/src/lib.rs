//! HTTP API and command line for the coursegate engine.
//!
//! [`Store`] owns a registry and an executor rooted in a data directory.
//! The registry is written through to `repository.json` on every mutation
//! and finished runs live under `runs/`, so a restarted service answers
//! every GET exactly as before. [`api::router`] maps `/v1` endpoints onto
//! store operations one to one and [`cli`] does the same for subcommands.

pub mod api;
pub mod cli;
pub mod error;
pub mod server;
pub mod store;

pub use error::{ApiError, ServiceError};
pub use server::{serve, ServeConfig, Server};
pub use store::{PlanRequest, RunInput, RunRequest, Store, TrackRequest};
