//! Episode runners for the reflect-before-act loop and the ReAct baseline.

mod log;
mod runner;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::protocol::{FormatId, PromptTemplate, ReactTemplate, Turn};

pub use log::{CallLog, CallRecord, ExecRecord, JsonlLog, ParsedRecord};
pub use runner::{parse_react_reply, react_reminder, run_episode, AgentError, Episode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Rebact,
    React,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Rebact => "rebact",
            Policy::React => "react",
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rebact" => Ok(Policy::Rebact),
            "react" => Ok(Policy::React),
            other => Err(format!("unknown agent policy {other:?}")),
        }
    }
}

pub const DEFAULT_BUDGET: usize = 40;
pub const DEFAULT_MAX_PARSE_RETRIES: usize = 2;

#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub policy: Policy,
    /// Reflect-before-act prompt; also fixes the reply format and window.
    pub template: PromptTemplate,
    pub react_template: ReactTemplate,
    /// Maximum number of environment actions.
    pub budget: usize,
    pub max_parse_retries: usize,
    /// Per-call deadline handed to the backend.
    pub call_timeout: Option<Duration>,
}

impl AgentConfig {
    /// Crafting-format defaults for the given policy.
    pub fn new(policy: Policy) -> Self {
        Self {
            policy,
            template: PromptTemplate::default_for(FormatId::Textcraft),
            react_template: ReactTemplate::default_textcraft(),
            budget: DEFAULT_BUDGET,
            max_parse_retries: DEFAULT_MAX_PARSE_RETRIES,
            call_timeout: None,
        }
    }

    pub fn format(&self) -> FormatId {
        self.template.format()
    }

    pub fn window(&self) -> usize {
        self.template.window()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntrySource {
    Next,
    Modified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryEntry {
    pub action: String,
    pub observation: String,
    pub source: EntrySource,
    pub rejected: bool,
    /// Call indices of every model call made for this step, retries included.
    pub llm_call_ids: Vec<usize>,
    pub discarded_next: Option<String>,
}

impl Turn for TrajectoryEntry {
    fn action(&self) -> &str {
        &self.action
    }

    fn observation(&self) -> &str {
        &self.observation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Success,
    BudgetExhausted,
    ParseAbort,
    BackendError,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Success => "success",
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::ParseAbort => "parse_abort",
            Termination::BackendError => "backend_error",
        }
    }
}

/// Append-only record of what one episode executed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub task_id: String,
    pub entries: Vec<TrajectoryEntry>,
    /// `None` while the episode is running.
    pub termination: Option<Termination>,
}

impl Trajectory {
    pub fn new(task_id: impl Into<String>) -> Self {
        Self {
            task_id: task_id.into(),
            entries: Vec::new(),
            termination: None,
        }
    }

    pub fn actions(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.action.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub method: Policy,
    pub success: bool,
    pub score: u32,
    pub steps: usize,
    pub llm_calls: usize,
    pub modifications: usize,
    pub retries: usize,
    pub termination: Termination,
}
