//! Batch evaluation, report regeneration and the environment line server.

mod report;
mod run;
mod serve;

use std::path::PathBuf;

pub use report::cmd_report;
pub use run::{cmd_run, episode_file_name, load_task_set, RunConfig, RunFile, RunOutcome};
pub use serve::{cmd_serve, serve_session, serve_tcp, Transport};

pub const RESULTS_FILE: &str = "results.jsonl";
pub const LOG_DIR: &str = "logs";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const SUMMARY_CSV: &str = "summary.csv";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Integrity(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
