use std::sync::Arc;

use proptest::prelude::*;
use rebact_core::agent::{CallRecord, EntrySource, JsonlLog};
use rebact_core::backend::{faulty_backend, planner_backend, PlannerBackend, ScriptedBackend};
use rebact_core::env::samples::{beehive_task, random_commands, random_task};
use rebact_core::env::{generate_tasks, GenerateOptions, RecipeUniverse};
use rebact_core::metrics::{check_consistency, read_trajectory_log, recount};
use rebact_core::protocol::{
    render_reflection, FormatId, ReflectionDecision, SlotVerdict, Verdict,
};
use rebact_core::{run_episode, AgentConfig, CraftTask, Policy, Termination};

/// Replies that accept every previous action and propose `actions` in turn.
fn approving_script(actions: &[String]) -> Vec<String> {
    actions
        .iter()
        .enumerate()
        .map(|(i, next)| {
            let slots = match i {
                0 => Vec::new(),
                _ => vec![SlotVerdict {
                    previous: actions[i - 1].clone(),
                    verdict: Verdict::Correct,
                    modified: actions[i - 1].clone(),
                }],
            };
            let d = ReflectionDecision {
                slots,
                next_action: next.clone(),
                raw: String::new(),
            };
            render_reflection(&d, FormatId::Textcraft)
        })
        .collect()
}

fn env_trace(
    policy: Policy,
    task: &Arc<CraftTask>,
    script: Vec<String>,
    budget: usize,
) -> Vec<(String, String)> {
    let mut cfg = AgentConfig::new(policy);
    cfg.budget = budget;
    let mut backend = ScriptedBackend::new(script);
    let mut log = Vec::new();
    let ep =
        run_episode(&cfg, task.clone(), &mut backend, &mut log).expect("script covers the budget");
    ep.trajectory
        .entries
        .iter()
        .map(|e| (e.action.clone(), e.observation.clone()))
        .collect()
}

fn strip_durations(mut log: Vec<CallRecord>) -> Vec<CallRecord> {
    for r in &mut log {
        r.duration_ms = 0;
    }
    log
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn approving_reflection_matches_react(task_seed in any::<u64>(), cmd_seed in any::<u64>()) {
        let task = Arc::new(random_task(task_seed));
        let actions: Vec<String> = random_commands(&task, cmd_seed, 12)
            .into_iter()
            .map(|a| a.trim().to_string())
            .collect();
        let rebact = env_trace(Policy::Rebact, &task, approving_script(&actions), actions.len());
        let react = env_trace(Policy::React, &task, actions.clone(), actions.len());
        prop_assert_eq!(rebact, react);
    }
}

#[test]
fn planner_success_is_policy_independent() {
    let universe = RecipeUniverse::synthetic(5);
    for depth in 1..=3 {
        for task in generate_tasks(&universe, depth, 10, 2, &GenerateOptions::default()).unwrap() {
            let task = Arc::new(task);
            for policy in [Policy::Rebact, Policy::React] {
                let mut log = Vec::new();
                let mut backend = planner_backend(task.clone());
                let ep = run_episode(
                    &AgentConfig::new(policy),
                    task.clone(),
                    &mut backend,
                    &mut log,
                )
                .unwrap();
                assert!(ep.success, "{policy} failed {}", task.id());
                assert_eq!(ep.llm_calls, ep.steps);
            }
        }
    }
}

#[test]
fn faulty_runs_keep_the_accounting_identities() {
    let universe = RecipeUniverse::synthetic(9);
    let tasks = generate_tasks(&universe, 3, 20, 4, &GenerateOptions::default()).unwrap();
    for task in tasks {
        let task = Arc::new(task);
        for policy in [Policy::Rebact, Policy::React] {
            let mut backend = faulty_backend(
                PlannerBackend::open_loop(task.clone()),
                0.3,
                17,
                task.id(),
                task.goal().item.as_str(),
            );
            let mut log = Vec::new();
            let ep = run_episode(
                &AgentConfig::new(policy),
                task.clone(),
                &mut backend,
                &mut log,
            )
            .unwrap();
            let c = recount(&log);
            assert_eq!(ep.llm_calls, ep.steps + ep.retries);
            assert_eq!(
                (c.llm_calls, c.steps, c.modifications, c.retries),
                (ep.llm_calls, ep.steps, ep.modifications, ep.retries)
            );
            let modified = ep
                .trajectory
                .entries
                .iter()
                .filter(|e| e.source == EntrySource::Modified)
                .count();
            assert_eq!(modified, ep.modifications);
            check_consistency(&ep.result, &log).unwrap();
            if policy == Policy::Rebact {
                assert!(ep.success, "{}", task.id());
            }
            if backend.faults() > 0 && policy == Policy::React {
                assert!(!ep.success, "{}", task.id());
            }
        }
    }
}

#[test]
fn logs_are_deterministic_and_round_trip_through_jsonl() {
    let task = Arc::new(beehive_task());
    let script = [
        "nonsense",
        "The next action is: get 1 beehive.",
        "Previous action 'get 1 beehive' is wrong. It should be modified to: get 6 oak planks.\nThe next action is: get 3 honeycomb.",
        "Previous action 'get 6 oak planks' is correct. It should be modified to: get 6 oak planks.\nThe next action is: get 3 honeycomb.",
        "Previous action 'get 3 honeycomb' is correct. It should be modified to: get 3 honeycomb.\nThe next action is: craft 1 beehive using 6 oak planks, 3 honeycomb.",
    ];
    let run = || {
        let mut backend = ScriptedBackend::new(script);
        let mut log = Vec::new();
        let ep = run_episode(
            &AgentConfig::new(Policy::Rebact),
            task.clone(),
            &mut backend,
            &mut log,
        )
        .unwrap();
        (ep, log)
    };
    let (a, log_a) = run();
    let (b, log_b) = run();
    assert_eq!(a, b);
    assert_eq!(strip_durations(log_a.clone()), strip_durations(log_b));
    assert_eq!(a.termination, Termination::Success);
    assert_eq!(
        (a.steps, a.llm_calls, a.retries, a.modifications),
        (4, 5, 1, 1)
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("beehive.jsonl");
    let mut jsonl = JsonlLog::new(std::fs::File::create(&path).unwrap());
    let mut backend = ScriptedBackend::new(script);
    run_episode(
        &AgentConfig::new(Policy::Rebact),
        task.clone(),
        &mut backend,
        &mut jsonl,
    )
    .unwrap();
    drop(jsonl);
    let read = read_trajectory_log(&path).unwrap();
    assert_eq!(strip_durations(read), strip_durations(log_a));

    let first = std::fs::read_to_string(&path).unwrap();
    let first_line = first.lines().next().unwrap();
    let keys = [
        "episode_id",
        "step",
        "call_index",
        "prompt_sha256",
        "response",
        "parsed",
        "parse_error",
        "exec",
        "observation",
        "duration_ms",
    ];
    let positions: Vec<usize> = keys
        .iter()
        .map(|k| first_line.find(&format!("\"{k}\"")).unwrap())
        .collect();
    assert!(
        positions.windows(2).all(|w| w[0] < w[1]),
        "field order: {first_line}"
    );
}
