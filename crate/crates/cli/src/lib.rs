//! Configuration parsing and subcommands of the `lyap` command-line tool.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

pub use commands::{run, Command};
pub use config::{parse_config, ProblemConfig};
pub use report::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: koopman_lyap::Error,
    },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}
