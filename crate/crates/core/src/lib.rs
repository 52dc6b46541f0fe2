//! Reflect-before-act agent harness.
//!
//! Each agent step makes one model call that both judges the previous
//! action(s) and proposes the next one. A previous action judged wrong is
//! corrected by executing its revised version; otherwise the proposed next
//! action runs. Episodes are played against a deterministic text crafting
//! environment with scripted, oracle and HTTP model backends.

pub mod agent;
pub mod backend;
pub mod env;
pub mod metrics;
pub mod protocol;

pub use agent::{run_episode, AgentConfig, EpisodeResult, Policy, Termination, Trajectory};
pub use backend::{Backend, BackendError, CompletionRequest};
pub use env::{CraftEnv, CraftTask, Inventory, ItemName};
pub use protocol::{FormatId, PromptTemplate, ReflectionDecision};
