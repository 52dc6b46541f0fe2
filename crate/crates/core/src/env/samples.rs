//! Small hand-written and seeded random tasks used by tests, benches and
//! documentation.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::command::Stack;
use super::item::ItemName;
use super::recipe::{GenericMap, Recipe};
use super::task::CraftTask;

fn item(s: &str) -> ItemName {
    ItemName::new(s).expect("sample item names are non-empty")
}

fn stack(s: &str, n: u64) -> Stack {
    Stack::new(item(s), n)
}

pub fn planks_generics() -> GenericMap {
    let specs: BTreeSet<ItemName> = ["oak planks", "dark oak planks", "birch planks"]
        .into_iter()
        .map(item)
        .collect();
    GenericMap::new(BTreeMap::from([(item("planks"), specs)])).expect("valid sample generics")
}

/// `beehive <- 6 planks + 3 honeycomb` and `4 stick <- 2 planks`; oak planks
/// and honeycomb are gettable.
pub fn beehive_task() -> CraftTask {
    CraftTask::new(
        "beehive",
        stack("beehive", 1),
        vec![
            Recipe::new(
                stack("beehive", 1),
                vec![stack("planks", 6), stack("honeycomb", 3)],
            )
            .expect("valid recipe"),
            Recipe::new(stack("stick", 4), vec![stack("planks", 2)]).expect("valid recipe"),
        ],
        [item("oak planks"), item("honeycomb")]
            .into_iter()
            .collect(),
        planks_generics(),
        crate::env::DEFAULT_EXEMPLARS,
    )
    .expect("valid sample task")
}

/// `ladder <- 7 stick`, `4 stick <- 2 planks`: needs two stick crafts.
pub fn ladder_task() -> CraftTask {
    CraftTask::new(
        "ladder",
        stack("ladder", 3),
        vec![
            Recipe::new(stack("ladder", 3), vec![stack("stick", 7)]).expect("valid recipe"),
            Recipe::new(stack("stick", 4), vec![stack("planks", 2)]).expect("valid recipe"),
        ],
        [item("planks")].into_iter().collect(),
        planks_generics(),
        crate::env::DEFAULT_EXEMPLARS,
    )
    .expect("valid sample task")
}

/// One recipe `count output <- ingredients`, every ingredient gettable.
pub fn single_recipe_task(output: &str, count: u64, ingredients: &[(&str, u64)]) -> CraftTask {
    CraftTask::new(
        format!("single-{output}"),
        stack(output, count),
        vec![Recipe::new(
            stack(output, count),
            ingredients.iter().map(|(s, n)| stack(s, *n)).collect(),
        )
        .expect("valid recipe")],
        ingredients.iter().map(|(s, _)| item(s)).collect(),
        GenericMap::default(),
        "",
    )
    .expect("valid sample task")
}

const RANDOM_BASES: [&str; 6] = ["coal", "iron ingot", "sand", "clay", "string", "reed"];
const RANDOM_CRAFTED: [&str; 6] = ["gear", "rod", "plate", "frame", "lamp", "drum"];

/// A random acyclic recipe book of 1 to 6 recipes over 2 to 4 gettable base
/// items, sometimes with a `planks` generic. Each crafted item has one
/// recipe; the goal is one batch of the last crafted item. A recipe never
/// names both a generic and one of its specializations.
pub fn random_task(seed: u64) -> CraftTask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bases: Vec<&str> = RANDOM_BASES.to_vec();
    bases.shuffle(&mut rng);
    bases.truncate(rng.random_range(2..=4));

    let with_planks = rng.random_bool(0.5);
    let mut gettable: BTreeSet<ItemName> = bases.iter().copied().map(item).collect();
    let mut slots: Vec<&str> = bases.clone();
    if with_planks {
        gettable.extend(planks_generics().specializations(&item("planks")).cloned());
        slots.push("planks");
        slots.push("oak planks");
    }

    let n_crafted = rng.random_range(1..=RANDOM_CRAFTED.len());
    let mut recipes = Vec::new();
    for name in &RANDOM_CRAFTED[..n_crafted] {
        let mut chosen: Vec<&str> = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let pick = *slots.choose(&mut rng).expect("slots are non-empty");
            let clashes = chosen.contains(&pick)
                || (pick.ends_with("planks") && chosen.iter().any(|c| c.ends_with("planks")));
            if !clashes {
                chosen.push(pick);
            }
        }
        let ingredients = chosen
            .iter()
            .map(|s| stack(s, rng.random_range(1..=3)))
            .collect();
        recipes.push(
            Recipe::new(stack(name, rng.random_range(1..=4)), ingredients)
                .expect("valid random recipe"),
        );
        slots.push(name);
    }
    let goal = recipes
        .last()
        .expect("at least one recipe")
        .output()
        .clone();
    let generics = if with_planks {
        planks_generics()
    } else {
        GenericMap::default()
    };
    CraftTask::new(
        format!("random-{seed}"),
        goal,
        recipes,
        gettable,
        generics,
        "",
    )
    .expect("random tasks are valid by construction")
}

/// Random command lines for `task`: mostly well-formed gets and crafts that
/// restate a recipe (sometimes with a wrong count or a split generic), plus
/// inventory queries, thoughts and malformed text.
pub fn random_commands(task: &CraftTask, seed: u64, len: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generics = task.generics();
    let mut names: Vec<ItemName> = task.gettable_items().into_iter().collect();
    names.extend(task.recipes().iter().map(|r| r.output().item.clone()));
    names.extend(generics.iter().map(|(g, _)| g.clone()));

    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let line = match rng.random_range(0..10) {
            0..=3 => {
                let name = names
                    .choose(&mut rng)
                    .expect("tasks name at least one item");
                format!("get {} {name}", rng.random_range(1..=6))
            }
            4..=7 => {
                let recipe = task.recipes().choose(&mut rng).expect("tasks have recipes");
                let out_count = if rng.random_bool(0.85) {
                    recipe.output().count
                } else {
                    rng.random_range(1..=5)
                };
                let mut inputs = Vec::new();
                for slot in recipe.ingredients() {
                    let mut count = slot.count;
                    if rng.random_bool(0.05) {
                        count += 1;
                    }
                    if generics.is_generic(&slot.item) && rng.random_bool(0.5) {
                        let specs: Vec<&ItemName> = generics.specializations(&slot.item).collect();
                        let first = rng.random_range(0..=count);
                        for (spec, n) in [
                            (specs[0], first),
                            (*specs.choose(&mut rng).expect("non-empty"), count - first),
                        ] {
                            if n > 0 {
                                inputs.push(format!("{n} {spec}"));
                            }
                        }
                    } else {
                        inputs.push(format!("{count} {}", slot.item));
                    }
                }
                format!(
                    "craft {out_count} {} using {}",
                    recipe.output().item,
                    inputs.join(", ")
                )
            }
            8 => "inventory".to_string(),
            _ => match rng.random_range(0..3) {
                0 => "think: what next".to_string(),
                1 => "craft using nothing".to_string(),
                _ => format!("get {} ", rng.random_range(0..3)),
            },
        };
        out.push(line);
    }
    out
}
