use serde::{Deserialize, Serialize};

use super::reply::{ReflectionDecision, Verdict};

/// Contract breaches in a parsed decision. They never block execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A wrong verdict whose correction repeats the previous action.
    ModifiedEqualsPrevious { slot: usize },
    /// A correct verdict that nevertheless supplies a different action.
    CorrectButModified { slot: usize },
    /// The proposed next action repeats the correction.
    NextEqualsModified,
    /// The reply judged a different number of actions than were reflected.
    SlotCountMismatch { expected: usize, got: usize },
    /// The reply quotes a previous action that was not executed.
    PreviousMismatch { slot: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Executed {
    Modified { action: String, slot: usize },
    Next { action: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecChoice {
    pub executed: Executed,
    /// The next action that was not run because a correction took its place.
    pub discarded_next: Option<String>,
    pub violations: Vec<Violation>,
}

impl ExecChoice {
    pub fn action(&self) -> &str {
        match &self.executed {
            Executed::Modified { action, .. } | Executed::Next { action } => action,
        }
    }

    pub fn is_modified(&self) -> bool {
        matches!(self.executed, Executed::Modified { .. })
    }
}

/// Case- and whitespace-insensitive action comparison.
pub fn same_action(a: &str, b: &str) -> bool {
    let norm = |s: &str| {
        s.split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
    };
    norm(a) == norm(b)
}

/// Picks the single action to execute for a decision.
///
/// The earliest slot judged wrong whose correction differs from the action
/// it replaces is executed; otherwise the proposed next action is.
pub fn decide_executed_action(decision: &ReflectionDecision, previous: &[String]) -> ExecChoice {
    let mut violations = Vec::new();
    if decision.slots.len() != previous.len() {
        violations.push(Violation::SlotCountMismatch {
            expected: previous.len(),
            got: decision.slots.len(),
        });
    }

    let mut chosen = None;
    for (i, (slot, prev)) in decision.slots.iter().zip(previous).enumerate() {
        if !same_action(&slot.previous, prev) {
            violations.push(Violation::PreviousMismatch { slot: i });
        }
        let differs = !same_action(&slot.modified, prev);
        match slot.verdict {
            Verdict::Wrong if differs => {
                if chosen.is_none() {
                    chosen = Some((i, slot.modified.clone()));
                }
            }
            Verdict::Wrong => violations.push(Violation::ModifiedEqualsPrevious { slot: i }),
            Verdict::Correct if differs => {
                violations.push(Violation::CorrectButModified { slot: i })
            }
            Verdict::Correct => {}
        }
    }

    match chosen {
        Some((slot, action)) => {
            if same_action(&decision.next_action, &action) {
                violations.push(Violation::NextEqualsModified);
            }
            ExecChoice {
                executed: Executed::Modified { action, slot },
                discarded_next: Some(decision.next_action.clone()),
                violations,
            }
        }
        None => ExecChoice {
            executed: Executed::Next {
                action: decision.next_action.clone(),
            },
            discarded_next: None,
            violations,
        },
    }
}
