use std::sync::Arc;

use super::command::{parse_command, Command, Stack};
use super::inventory::{render_inventory, Inventory};
use super::matching::match_recipe;
use super::task::CraftTask;

/// Text returned by one environment step, and whether the action was refused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub text: String,
    pub rejected: bool,
}

impl Observation {
    fn accepted(text: String) -> Self {
        Self {
            text,
            rejected: false,
        }
    }

    fn rejected(text: String) -> Self {
        Self {
            text,
            rejected: true,
        }
    }
}

pub fn goal_reached(inv: &Inventory, goal: &Stack) -> bool {
    inv.count(&goal.item) >= goal.count
}

/// Pure transition function: returns the observation and the next inventory.
pub fn apply(task: &CraftTask, inv: &Inventory, cmd: &Command) -> (Observation, Inventory) {
    match cmd {
        Command::Get(stack) => {
            if task.is_gettable(&stack.item) {
                let mut next = inv.clone();
                next.add(&stack.item, stack.count);
                (Observation::accepted(format!("Got {stack}")), next)
            } else {
                (
                    Observation::rejected(format!("Could not find {}", stack.item)),
                    inv.clone(),
                )
            }
        }
        Command::Craft { target, inputs } => match match_recipe(target, inputs, task, inv) {
            Ok(plan) => {
                let mut next = inv.clone();
                for used in &plan.consumed {
                    let ok = next.remove(&used.item, used.count);
                    debug_assert!(ok, "matched plan consumes only held items");
                }
                next.add(&plan.produced.item, plan.produced.count);
                (
                    Observation::accepted(format!("Crafted {}", plan.produced)),
                    next,
                )
            }
            Err(rejection) => (Observation::rejected(rejection.to_string()), inv.clone()),
        },
        Command::InventoryQuery => (Observation::accepted(render_inventory(inv)), inv.clone()),
        Command::Think(_) => (Observation::accepted("OK.".to_string()), inv.clone()),
    }
}

/// A single-episode crafting environment.
#[derive(Debug, Clone)]
pub struct CraftEnv {
    task: Arc<CraftTask>,
    inventory: Inventory,
}

impl CraftEnv {
    pub fn new(task: Arc<CraftTask>) -> Self {
        Self {
            task,
            inventory: Inventory::new(),
        }
    }

    pub fn task(&self) -> &Arc<CraftTask> {
        &self.task
    }

    pub fn inventory(&self) -> &Inventory {
        &self.inventory
    }

    pub fn step(&mut self, cmd: &Command) -> Observation {
        let (obs, next) = apply(&self.task, &self.inventory, cmd);
        self.inventory = next;
        obs
    }

    /// Parses and executes one action line. Unparseable text is refused with
    /// `Could not execute <text>`.
    pub fn step_text(&mut self, text: &str) -> Observation {
        match parse_command(text) {
            Ok(cmd) => self.step(&cmd),
            Err(_) => Observation::rejected(format!("Could not execute {}", text.trim())),
        }
    }

    pub fn goal_reached(&self) -> bool {
        goal_reached(&self.inventory, self.task.goal())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::samples::beehive_task;
    use crate::env::ItemName;

    fn env() -> CraftEnv {
        CraftEnv::new(Arc::new(beehive_task()))
    }

    fn stack(s: &str, n: u64) -> Stack {
        Stack::new(ItemName::new(s).unwrap(), n)
    }

    #[test]
    fn get_gettable_item() {
        let mut env = env();
        let obs = env.step_text("get 3 honeycomb");
        assert_eq!(obs.text, "Got 3 honeycomb");
        assert!(!obs.rejected);
        assert_eq!(env.inventory().count(&stack("honeycomb", 0).item), 3);
    }

    #[test]
    fn get_craftable_item_is_refused() {
        let mut env = env();
        let obs = env.step_text("get 1 beehive");
        assert_eq!(obs.text, "Could not find beehive");
        assert!(obs.rejected);
        assert!(env.inventory().is_empty());
    }

    #[test]
    fn think_and_inventory_leave_state() {
        let mut env = env();
        env.step_text("get 3 honeycomb");
        let before = env.inventory().clone();
        assert_eq!(env.step_text("think: I need planks").text, "OK.");
        assert_eq!(env.step_text("inventory").text, "Inventory: 3 honeycomb");
        assert_eq!(env.inventory(), &before);
    }

    #[test]
    fn unparseable_text() {
        let mut env = env();
        let obs = env.step_text("make 1 stick");
        assert_eq!(obs.text, "Could not execute make 1 stick");
        assert!(obs.rejected);
    }

    #[test]
    fn full_beehive_episode() {
        let mut env = env();
        for line in ["get 6 oak planks", "get 3 honeycomb"] {
            assert!(!env.step_text(line).rejected);
        }
        assert!(!env.goal_reached());
        let obs = env.step_text("craft 1 beehive using 6 oak planks, 3 honeycomb");
        assert_eq!(obs.text, "Crafted 1 beehive");
        assert!(env.goal_reached());
        assert_eq!(env.inventory().iter().count(), 1);
    }

    #[test]
    fn goal_reached_examples() {
        let goal = stack("beehive", 1);
        let held = |n| [stack("beehive", n)].into_iter().collect::<Inventory>();
        assert!(goal_reached(&held(1), &goal));
        assert!(goal_reached(&held(2), &goal));
        assert!(!goal_reached(&Inventory::new(), &goal));
    }
}
