//! Completion providers behind a single blocking contract.

mod config;
mod faulty;
mod http;
pub mod plan;
mod planner;
mod scripted;

use std::time::Instant;

use crate::agent::Policy;
use crate::env::Inventory;
use crate::protocol::FormatId;

pub use config::{BackendConfig, BackendFactory, BackendKind, ConfigError};
pub use faulty::{faulty_backend, FaultyBackend};
pub use http::{HttpBackend, HttpConfig};
pub use plan::{bfs_plan, bfs_plan_from, Plan, PlanError, PlannerLimits};
pub use planner::{planner_backend, ActionSource, PlannerBackend};
pub use scripted::{parse_script, ScriptedBackend};

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("deadline exceeded")]
    DeadlineExceeded,
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// One executed action as seen by a backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeRecord {
    pub action: String,
    pub observation: String,
    pub rejected: bool,
}

/// Where in an episode a request comes from. Oracle backends read the
/// ground-truth inventory; model-backed ones ignore everything but the prompt.
#[derive(Debug, Clone)]
pub struct EpisodeContext {
    pub task_id: String,
    pub step: usize,
    pub call_index: usize,
    pub policy: Policy,
    pub format: FormatId,
    /// Previous actions the prompt asks the model to judge, oldest first.
    pub reflected: Vec<String>,
    pub history: Vec<ExchangeRecord>,
    pub inventory: Inventory,
}

#[derive(Debug, Clone)]
pub struct CompletionRequest {
    pub prompt: String,
    pub context: EpisodeContext,
    pub deadline: Option<Instant>,
}

pub trait Backend: Send {
    fn complete(&mut self, req: &CompletionRequest) -> Result<String, BackendError>;

    /// Transport-level retries performed so far.
    fn transport_retries(&self) -> u64 {
        0
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn complete(&mut self, req: &CompletionRequest) -> Result<String, BackendError> {
        (**self).complete(req)
    }

    fn transport_retries(&self) -> u64 {
        (**self).transport_retries()
    }
}
