use std::sync::Arc;
use std::time::Instant;

use sha2::{Digest, Sha256};

use super::log::{CallLog, CallRecord, ExecRecord, ParsedRecord};
use super::{
    AgentConfig, EntrySource, EpisodeResult, Policy, Termination, Trajectory, TrajectoryEntry,
};
use crate::backend::{Backend, BackendError, CompletionRequest, EpisodeContext, ExchangeRecord};
use crate::env::{CraftEnv, CraftTask};
use crate::protocol::{
    build_prompt, decide_executed_action, format_reminder, parse_reflection, FormatError,
    PromptTask,
};

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    /// The backend failed; `partial` holds the counters up to that point.
    #[error("backend failed on task {}: {source}", partial.task_id)]
    Backend {
        #[source]
        source: BackendError,
        partial: Box<Episode>,
    },
    #[error("cannot write call log: {0}")]
    Log(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    pub result: EpisodeResult,
    pub trajectory: Trajectory,
}

impl std::ops::Deref for Episode {
    type Target = EpisodeResult;

    fn deref(&self) -> &EpisodeResult {
        &self.result
    }
}

/// Parses a ReAct reply: one non-empty line holding an action or a
/// `think:` thought. A single trailing period is dropped from actions.
pub fn parse_react_reply(text: &str) -> Result<String, FormatError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let line = lines.next().ok_or(FormatError::EmptyAction)?;
    if let Some(extra) = lines.next() {
        return Err(FormatError::TrailingText(extra.to_string()));
    }
    let line = line.strip_prefix('>').map(str::trim_start).unwrap_or(line);
    if line.to_ascii_lowercase().starts_with("think:") {
        return Ok(line.to_string());
    }
    let action = line.strip_suffix('.').unwrap_or(line).trim_end();
    if action.is_empty() {
        return Err(FormatError::EmptyAction);
    }
    Ok(action.to_string())
}

pub fn react_reminder() -> &'static str {
    "You must reply in this format: \"[action]\" or \"think: [thought]\""
}

enum StepOutcome {
    Executed,
    ParseAbort,
}

struct Reply {
    executed: String,
    source: EntrySource,
    parsed: ParsedRecord,
    exec_violations: Vec<crate::protocol::Violation>,
    discarded: Option<String>,
}

struct Runner<'a> {
    cfg: &'a AgentConfig,
    env: CraftEnv,
    backend: &'a mut dyn Backend,
    log: &'a mut dyn CallLog,
    trajectory: Trajectory,
    llm_calls: usize,
    retries: usize,
    modifications: usize,
}

/// Plays one episode until the goal is reached, the step budget runs out,
/// or a reply stays unparseable after `max_parse_retries` retries.
///
/// Every model call is written to `log` before the next one is made. On a
/// backend failure the log is flushed and the counters so far are returned
/// inside the error.
pub fn run_episode(
    cfg: &AgentConfig,
    task: Arc<CraftTask>,
    backend: &mut dyn Backend,
    log: &mut dyn CallLog,
) -> Result<Episode, AgentError> {
    let mut runner = Runner {
        cfg,
        trajectory: Trajectory::new(task.id()),
        env: CraftEnv::new(task),
        backend,
        log,
        llm_calls: 0,
        retries: 0,
        modifications: 0,
    };
    let termination = loop {
        if runner.env.goal_reached() {
            break Termination::Success;
        }
        if runner.trajectory.entries.len() >= cfg.budget {
            break Termination::BudgetExhausted;
        }
        match runner.step() {
            Ok(StepOutcome::Executed) => {}
            Ok(StepOutcome::ParseAbort) => break Termination::ParseAbort,
            Err(StepError::Log(e)) => return Err(AgentError::Log(e)),
            Err(StepError::Backend(source)) => {
                runner.log.flush()?;
                let partial = runner.finish(Termination::BackendError);
                return Err(AgentError::Backend {
                    source,
                    partial: Box::new(partial),
                });
            }
        }
    };
    runner.log.flush()?;
    Ok(runner.finish(termination))
}

enum StepError {
    Backend(BackendError),
    Log(std::io::Error),
}

impl From<std::io::Error> for StepError {
    fn from(e: std::io::Error) -> Self {
        StepError::Log(e)
    }
}

impl Runner<'_> {
    fn finish(mut self, termination: Termination) -> Episode {
        self.trajectory.termination = Some(termination);
        let success = termination == Termination::Success;
        Episode {
            result: EpisodeResult {
                task_id: self.trajectory.task_id.clone(),
                method: self.cfg.policy,
                success,
                score: if success { 100 } else { 0 },
                steps: self.trajectory.entries.len(),
                llm_calls: self.llm_calls,
                modifications: self.modifications,
                retries: self.retries,
                termination,
            },
            trajectory: self.trajectory,
        }
    }

    fn context(&self, reflected: &[String]) -> EpisodeContext {
        EpisodeContext {
            task_id: self.trajectory.task_id.clone(),
            step: self.trajectory.entries.len(),
            call_index: self.llm_calls,
            policy: self.cfg.policy,
            format: self.cfg.format(),
            reflected: reflected.to_vec(),
            history: self
                .trajectory
                .entries
                .iter()
                .map(|e| ExchangeRecord {
                    action: e.action.clone(),
                    observation: e.observation.clone(),
                    rejected: e.rejected,
                })
                .collect(),
            inventory: self.env.inventory().clone(),
        }
    }

    fn step(&mut self) -> Result<StepOutcome, StepError> {
        let task = Arc::clone(self.env.task());
        let entries = &self.trajectory.entries;
        let (base, reflected, reminder) = match self.cfg.policy {
            Policy::Rebact => {
                let built = build_prompt(
                    &self.cfg.template,
                    task.as_ref() as &dyn PromptTask,
                    entries,
                );
                let reminder = format_reminder(self.cfg.format(), &built.reflected);
                (built.text, built.reflected, reminder)
            }
            Policy::React => {
                let text = self
                    .cfg
                    .react_template
                    .build(task.as_ref() as &dyn PromptTask, entries);
                (text, Vec::new(), react_reminder().to_string())
            }
        };

        let mut prompt = base.clone();
        let mut call_ids = Vec::new();
        for _ in 0..=self.cfg.max_parse_retries {
            let call_index = self.llm_calls;
            let req = CompletionRequest {
                prompt: prompt.clone(),
                context: self.context(&reflected),
                deadline: self.cfg.call_timeout.map(|t| Instant::now() + t),
            };
            let started = Instant::now();
            let response = self.backend.complete(&req).map_err(StepError::Backend)?;
            let duration_ms = u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX);
            self.llm_calls += 1;
            call_ids.push(call_index);

            let mut record = CallRecord {
                episode_id: self.trajectory.task_id.clone(),
                step: self.trajectory.entries.len(),
                call_index,
                prompt_sha256: hex::encode(Sha256::digest(prompt.as_bytes())),
                response: response.clone(),
                parsed: None,
                parse_error: None,
                exec: None,
                observation: None,
                duration_ms,
            };

            let reply = match self.interpret(&response, &reflected) {
                Ok(reply) => reply,
                Err(e) => {
                    tracing::debug!(task = %self.trajectory.task_id, error = %e, "unparseable reply");
                    self.retries += 1;
                    record.parse_error = Some(e.to_string());
                    self.log.record(&record)?;
                    prompt = format!("{base}\n{reminder}");
                    continue;
                }
            };

            let obs = self.env.step_text(&reply.executed);
            if reply.source == EntrySource::Modified {
                self.modifications += 1;
            }
            record.parsed = Some(reply.parsed);
            record.exec = Some(ExecRecord {
                action: reply.executed.clone(),
                source: reply.source,
                violations: reply.exec_violations,
                discarded: reply.discarded.clone(),
            });
            record.observation = Some(obs.text.clone());
            self.log.record(&record)?;
            self.trajectory.entries.push(TrajectoryEntry {
                action: reply.executed,
                observation: obs.text,
                source: reply.source,
                rejected: obs.rejected,
                llm_call_ids: call_ids,
                discarded_next: reply.discarded,
            });
            return Ok(StepOutcome::Executed);
        }
        Ok(StepOutcome::ParseAbort)
    }

    fn interpret(&self, response: &str, reflected: &[String]) -> Result<Reply, FormatError> {
        match self.cfg.policy {
            Policy::React => {
                let action = parse_react_reply(response)?;
                Ok(Reply {
                    parsed: ParsedRecord {
                        verdicts: Vec::new(),
                        modified: Vec::new(),
                        next: action.clone(),
                    },
                    executed: action,
                    source: EntrySource::Next,
                    exec_violations: Vec::new(),
                    discarded: None,
                })
            }
            Policy::Rebact => {
                let decision = parse_reflection(response, self.cfg.format())?;
                if decision.slots.len() != reflected.len() {
                    return Err(FormatError::SlotCount {
                        expected: reflected.len(),
                        got: decision.slots.len(),
                    });
                }
                let choice = decide_executed_action(&decision, reflected);
                Ok(Reply {
                    parsed: ParsedRecord {
                        verdicts: decision.slots.iter().map(|s| s.verdict).collect(),
                        modified: decision.slots.iter().map(|s| s.modified.clone()).collect(),
                        next: decision.next_action.clone(),
                    },
                    executed: choice.action().to_string(),
                    source: if choice.is_modified() {
                        EntrySource::Modified
                    } else {
                        EntrySource::Next
                    },
                    exec_violations: choice.violations,
                    discarded: choice.discarded_next,
                })
            }
        }
    }
}
