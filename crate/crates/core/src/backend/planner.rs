use std::sync::Arc;

use super::plan::{bfs_plan_from, PlannerLimits};
use super::{Backend, BackendError, CompletionRequest, EpisodeContext};
use crate::agent::Policy;
use crate::env::{CraftTask, Inventory};
use crate::protocol::{render_reflection, same_action, ReflectionDecision, SlotVerdict, Verdict};

/// The no-op emitted once there is nothing left to do.
pub(crate) const IDLE_ACTION: &str = "inventory";

/// Produces the next environment action for an episode.
pub trait ActionSource: Send {
    /// Returns the next action and advances past it.
    fn next_action(&mut self, ctx: &EpisodeContext) -> Result<String, BackendError>;

    /// The action `next_action` would return next, when already known.
    fn peek_action(&self) -> Option<String>;

    /// True when `next_action` would only return filler.
    fn exhausted(&self) -> bool;
}

/// Wraps an action source into protocol-correct replies: every previous
/// action is judged correct and repeated as its own modification.
pub(crate) fn wrap_reply(ctx: &EpisodeContext, next: &str) -> String {
    match ctx.policy {
        Policy::React => next.to_string(),
        Policy::Rebact => {
            let decision = ReflectionDecision {
                slots: ctx
                    .reflected
                    .iter()
                    .map(|prev| SlotVerdict {
                        previous: prev.clone(),
                        verdict: Verdict::Correct,
                        modified: prev.clone(),
                    })
                    .collect(),
                next_action: next.to_string(),
                raw: String::new(),
            };
            render_reflection(&decision, ctx.format)
        }
    }
}

/// Oracle backend following a shortest plan.
///
/// In closed-loop mode the plan is recomputed from the ground-truth inventory
/// whenever the last executed action was refused or was not the one this
/// backend proposed. In open-loop mode the plan is computed once and
/// followed blindly, then `inventory` is emitted forever.
#[derive(Debug, Clone)]
pub struct PlannerBackend {
    task: Arc<CraftTask>,
    limits: PlannerLimits,
    open_loop: bool,
    plan: Vec<String>,
    cursor: usize,
    planned: bool,
    last_emitted: Option<String>,
}

pub fn planner_backend(task: Arc<CraftTask>) -> PlannerBackend {
    PlannerBackend::new(task, false)
}

impl PlannerBackend {
    pub fn new(task: Arc<CraftTask>, open_loop: bool) -> Self {
        Self {
            task,
            limits: PlannerLimits::default(),
            open_loop,
            plan: Vec::new(),
            cursor: 0,
            planned: false,
            last_emitted: None,
        }
    }

    pub fn open_loop(task: Arc<CraftTask>) -> Self {
        Self::new(task, true)
    }

    fn replan(&mut self, inventory: &Inventory) -> Result<(), BackendError> {
        let plan = bfs_plan_from(&self.task, inventory, self.limits)?;
        self.plan = plan.action_texts();
        self.cursor = 0;
        self.planned = true;
        Ok(())
    }

    fn diverged(&self, ctx: &EpisodeContext) -> bool {
        match (ctx.history.last(), &self.last_emitted) {
            (None, _) => false,
            (Some(last), Some(emitted)) => last.rejected || !same_action(&last.action, emitted),
            (Some(_), None) => true,
        }
    }
}

impl ActionSource for PlannerBackend {
    fn next_action(&mut self, ctx: &EpisodeContext) -> Result<String, BackendError> {
        if !self.planned || (!self.open_loop && self.diverged(ctx)) {
            self.replan(&ctx.inventory)?;
        }
        let action = match self.plan.get(self.cursor) {
            Some(a) => {
                self.cursor += 1;
                a.clone()
            }
            None => IDLE_ACTION.to_string(),
        };
        self.last_emitted = Some(action.clone());
        Ok(action)
    }

    fn peek_action(&self) -> Option<String> {
        self.plan.get(self.cursor).cloned()
    }

    fn exhausted(&self) -> bool {
        self.planned && self.cursor >= self.plan.len()
    }
}

impl Backend for PlannerBackend {
    fn complete(&mut self, req: &CompletionRequest) -> Result<String, BackendError> {
        let next = self.next_action(&req.context)?;
        Ok(wrap_reply(&req.context, &next))
    }
}
