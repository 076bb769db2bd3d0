//! Operator surface: run configuration, policy checkpoints, and the
//! implementations behind the `pagealloc` subcommands.

mod artifact;
mod commands;
mod config;

pub use artifact::PolicyArtifact;
pub use commands::{cmd_eval, cmd_gen_workload, cmd_inspect, cmd_sweep, cmd_train};
pub use config::RunConfig;

use thiserror::Error;

/// Stable exit-code contract: 0 success, 2 config error, 3 I/O error,
/// 4 generation/verification error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("generation error: {0}")]
    Generation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Generation(_) => 4,
        }
    }

    pub(crate) fn io(context: &str, err: std::io::Error) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

/// Default master seed: `PAGEALLOC_SEED` when set, otherwise 0.
pub fn default_seed() -> u64 {
    std::env::var("PAGEALLOC_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}
