mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rebact_core::env::samples::{beehive_task, ladder_task, random_commands, random_task};
use rebact_core::env::{render_inventory, CraftEnv};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn random_sequences_respect_the_rules(task_seed in any::<u64>(), cmd_seed in any::<u64>()) {
        let task = Arc::new(random_task(task_seed));
        let lines = random_commands(&task, cmd_seed, 30);
        if let Err(e) = common::check_sequence(&task, &lines) {
            prop_assert!(false, "task {}: {}", task_seed, e);
        }
    }

    #[test]
    fn generic_slot_accepts_any_split(a in 0u64..=2, oak in 0u64..4, birch in 0u64..4) {
        // 2 planks stated as `a` oak planks plus the rest under the generic
        // name; succeeds iff the inventory covers it.
        let task = Arc::new(ladder_task());
        let mut env = CraftEnv::new(task.clone());
        for (n, item) in [(oak, "oak planks"), (birch, "birch planks")] {
            if n > 0 {
                env.step_text(&format!("get {n} {item}"));
            }
        }
        let mut parts = Vec::new();
        if a > 0 {
            parts.push(format!("{a} oak planks"));
        }
        if a < 2 {
            parts.push(format!("{} planks", 2 - a));
        }
        let before = env.inventory().clone();
        let line = format!("craft 4 stick using {}", parts.join(", "));
        let obs = env.step_text(&line);
        let feasible = a <= oak && oak + birch >= 2;
        prop_assert_eq!(!obs.rejected, feasible, "{} with {}", line, render_inventory(&before));
        common::check_transition(&task, &before, &line, &obs, env.inventory()).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn sample_walkthrough_observations() {
    let mut env = CraftEnv::new(Arc::new(beehive_task()));
    let steps = [
        ("get 1 beehive", "Could not find beehive"),
        ("get 6 oak planks", "Got 6 oak planks"),
        (
            "craft 1 beehive using 6 planks, 3 honeycomb",
            "Could not craft beehive: missing 3 honeycomb",
        ),
        ("get 3 honeycomb", "Got 3 honeycomb"),
        ("inventory", "Inventory: 3 honeycomb, 6 oak planks"),
        (
            "craft 2 stick using 1 planks",
            "Could not craft 2 stick: the recipe produces 4 stick",
        ),
        (
            "craft 1 beehive using 6 oak planks, 3 honeycomb",
            "Crafted 1 beehive",
        ),
        ("think: done", "OK."),
        ("dance", "Could not execute dance"),
    ];
    for (cmd, expect) in steps {
        assert_eq!(env.step_text(cmd).text, expect, "{cmd}");
    }
    assert!(env.goal_reached());
}

#[test]
fn random_sequences_include_successful_crafts() {
    let mut crafted = 0;
    for seed in 0..200 {
        let task = Arc::new(random_task(seed));
        let mut env = CraftEnv::new(task.clone());
        for line in random_commands(&task, seed, 30) {
            if env.step_text(&line).text.starts_with("Crafted") {
                crafted += 1;
            }
        }
    }
    assert!(crafted > 200, "only {crafted} successful crafts");
}
