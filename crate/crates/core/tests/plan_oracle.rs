mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rebact_core::backend::bfs_plan;
use rebact_core::env::samples::{beehive_task, ladder_task, random_task};
use rebact_core::env::{generate_tasks, GenerateOptions, RecipeUniverse};
use rebact_core::{CraftEnv, CraftTask};

fn replay_reaches_goal(task: &CraftTask, actions: &[String]) -> Result<(), String> {
    let mut env = CraftEnv::new(Arc::new(task.clone()));
    for a in actions {
        let obs = env.step_text(a);
        if obs.rejected {
            return Err(format!("{a:?} rejected: {}", obs.text));
        }
    }
    if env.goal_reached() {
        Ok(())
    } else {
        Err("goal not reached".into())
    }
}

fn assert_minimal(task: &CraftTask) {
    let plan = bfs_plan(task).unwrap_or_else(|e| panic!("{}: {e}", task.id()));
    let actions = plan.action_texts();
    replay_reaches_goal(task, &actions).unwrap_or_else(|e| panic!("{}: {e}", task.id()));
    assert_eq!(
        common::shortest_plan_len(task, actions.len()),
        Some(actions.len()),
        "{}: plan {:?} is not minimal",
        task.id(),
        actions
    );
}

#[test]
fn sample_plans_are_minimal() {
    assert_minimal(&beehive_task());
    assert_minimal(&ladder_task());
    assert_eq!(common::shortest_plan_len(&beehive_task(), 10), Some(3));
    assert_eq!(common::shortest_plan_len(&ladder_task(), 10), Some(4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn random_small_books_get_minimal_plans(seed in any::<u64>()) {
        let task = random_task(seed);
        prop_assume!(task.recipes().len() <= 3);
        assert_minimal(&task);
    }
}

#[test]
fn generated_tasks_have_the_requested_depth() {
    let universe = RecipeUniverse::synthetic(3);
    for depth in 1..=3 {
        let tasks = generate_tasks(&universe, depth, 50, 11, &GenerateOptions::default()).unwrap();
        assert_eq!(tasks.len(), 50);
        for task in &tasks {
            let plan = bfs_plan(task).unwrap();
            assert_eq!(plan.craft_count(), depth, "{}", task.id());
            replay_reaches_goal(task, &plan.action_texts()).unwrap();
            if task.recipes().len() <= 3 {
                assert_minimal(task);
            }
        }
    }
}
