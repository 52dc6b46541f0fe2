//! Text crafting environment: command grammar, recipes with generic
//! ingredients, inventory semantics and seeded task generation.

mod command;
mod generate;
mod inventory;
mod item;
mod matching;
mod recipe;
pub mod samples;
mod task;
mod world;

pub use command::{parse_command, Command, Stack, UnparseableCommand};
pub use generate::{
    generate_tasks, GenerateError, GenerateOptions, RecipeUniverse, DEFAULT_EXEMPLARS,
};
pub use inventory::{render_inventory, Inventory};
pub use item::{EmptyItemName, ItemName};
pub use matching::{match_recipe, CraftPlan, CraftRejection};
pub use recipe::{GenericMap, GenericMapError, Recipe, RecipeError};
pub use task::{load_tasks, parse_tasks, tasks_to_json, CraftTask, TaskError};
pub use world::{apply, goal_reached, CraftEnv, Observation};
