use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::planner::{wrap_reply, ActionSource, IDLE_ACTION};
use super::{Backend, BackendError, CompletionRequest};
use crate::agent::Policy;
use crate::protocol::{render_reflection, same_action, ReflectionDecision, SlotVerdict, Verdict};

/// Stable 64-bit FNV-1a, used to derive per-episode seeds.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Injects a known-bad action in place of the inner source's action with
/// probability `p` per planned step.
///
/// Under the reflect policy the following reply judges the bad action wrong
/// and supplies the replaced action as its correction. Under ReAct no
/// correction is ever offered, so the replaced action is lost. The fault
/// schedule depends only on the seed, the task id and the plan step index,
/// so both policies see the same faults.
pub struct FaultyBackend<S> {
    inner: S,
    p: f64,
    rng: ChaCha8Rng,
    bad_action: String,
    pending: Option<(String, String)>,
    faults: usize,
}

pub fn faulty_backend<S: ActionSource>(
    inner: S,
    p: f64,
    seed: u64,
    task_id: &str,
    goal_item: &str,
) -> FaultyBackend<S> {
    assert!(
        (0.0..=1.0).contains(&p),
        "fault probability must lie in [0, 1]"
    );
    FaultyBackend {
        inner,
        p,
        rng: ChaCha8Rng::seed_from_u64(seed ^ fnv1a(task_id.as_bytes())),
        bad_action: format!("get 1 {goal_item}"),
        pending: None,
        faults: 0,
    }
}

impl<S> FaultyBackend<S> {
    /// Faults injected so far.
    pub fn faults(&self) -> usize {
        self.faults
    }
}

impl<S: ActionSource> Backend for FaultyBackend<S> {
    fn complete(&mut self, req: &CompletionRequest) -> Result<String, BackendError> {
        let ctx = &req.context;
        if let Some((bad, replaced)) = self.pending.take() {
            if ctx
                .reflected
                .last()
                .is_some_and(|last| same_action(last, &bad))
            {
                let mut slots: Vec<SlotVerdict> = ctx
                    .reflected
                    .iter()
                    .map(|prev| SlotVerdict {
                        previous: prev.clone(),
                        verdict: Verdict::Correct,
                        modified: prev.clone(),
                    })
                    .collect();
                let last = slots.last_mut().expect("reflected is non-empty");
                last.verdict = Verdict::Wrong;
                last.modified = replaced;
                let decision = ReflectionDecision {
                    slots,
                    next_action: self
                        .inner
                        .peek_action()
                        .unwrap_or_else(|| IDLE_ACTION.into()),
                    raw: String::new(),
                };
                return Ok(render_reflection(&decision, ctx.format));
            }
        }

        let planned = !self.inner.exhausted();
        let action = self.inner.next_action(ctx)?;
        // The idle filler after the plan is not a planned step.
        let real_step = planned && !(self.inner.exhausted() && action == IDLE_ACTION);
        if real_step && self.p > 0.0 && self.rng.random_bool(self.p) {
            self.faults += 1;
            if ctx.policy == Policy::Rebact {
                self.pending = Some((self.bad_action.clone(), action));
            }
            return Ok(wrap_reply(ctx, &self.bad_action));
        }
        Ok(wrap_reply(ctx, &action))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::backend::tests::request;
    use crate::backend::PlannerBackend;
    use crate::env::samples::beehive_task;

    #[test]
    fn zero_probability_is_transparent() {
        let task = Arc::new(beehive_task());
        let mut plain = PlannerBackend::open_loop(task.clone());
        let mut faulty = faulty_backend(
            PlannerBackend::open_loop(task),
            0.0,
            9,
            "beehive",
            "beehive",
        );
        let req = request("p");
        for _ in 0..5 {
            assert_eq!(
                plain.complete(&req).unwrap(),
                faulty.complete(&req).unwrap()
            );
        }
        assert_eq!(faulty.faults(), 0);
    }

    #[test]
    fn certain_fault_then_correction() {
        let task = Arc::new(beehive_task());
        let mut b = faulty_backend(
            PlannerBackend::open_loop(task),
            1.0,
            1,
            "beehive",
            "beehive",
        );
        let mut req = request("p");
        assert_eq!(
            b.complete(&req).unwrap(),
            "The next action is: get 1 beehive."
        );
        req.context.reflected = vec!["get 1 beehive".into()];
        assert_eq!(
            b.complete(&req).unwrap(),
            "Previous action 'get 1 beehive' is wrong. It should be modified to: get 6 oak planks.\nThe next action is: get 3 honeycomb."
        );
    }

    #[test]
    fn seeded_schedule_is_reproducible() {
        let task = Arc::new(beehive_task());
        let run = |seed| {
            let mut b = faulty_backend(
                PlannerBackend::open_loop(task.clone()),
                0.5,
                seed,
                "t",
                "beehive",
            );
            let mut req = request("p");
            req.context.policy = Policy::React;
            (0..3)
                .map(|_| b.complete(&req).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
    }
}
