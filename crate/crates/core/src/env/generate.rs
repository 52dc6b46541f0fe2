use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::command::Stack;
use super::item::ItemName;
use super::recipe::{GenericMap, Recipe};
use super::task::CraftTask;
use crate::backend::plan::{bfs_plan, PlanError};

/// Demonstration block embedded in every generated task's prompt.
pub const DEFAULT_EXEMPLARS: &str = "\
Crafting commands:
craft 4 stick using 2 planks
craft 4 torch using 1 coal, 1 stick
craft 1 crafting table using 4 planks
Goal: craft 4 torch.

> think: I should check if I can fetch torch directly from the environment or the inventory.
OK.
> inventory
Inventory: empty
> get 4 torch
Could not find torch
> think: I cannot get torch directly, so I need to craft it. From the crafting commands, I need 1 coal and 1 stick.
OK.
> get 1 coal
Got 1 coal
> think: I do not have stick, so I need to craft it using 2 planks.
OK.
> get 2 oak planks
Got 2 oak planks
> craft 4 stick using 2 oak planks
Crafted 4 stick
> craft 4 torch using 1 coal, 1 stick
Crafted 4 torch
";

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("only {available} distinct goals need exactly {depth} crafts, {requested} requested")]
    InsufficientUniverse {
        depth: usize,
        requested: usize,
        available: usize,
    },
    #[error(transparent)]
    Task(#[from] super::task::TaskError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Every recipe and base item tasks are drawn from.
#[derive(Debug, Clone)]
pub struct RecipeUniverse {
    pub recipes: Vec<Recipe>,
    /// Concrete base items available through `get`.
    pub gettable: BTreeSet<ItemName>,
    pub generics: GenericMap,
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    /// Unrelated recipes mixed into each task's recipe book.
    pub distractors: usize,
    pub exemplar_block: String,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            distractors: 0,
            exemplar_block: DEFAULT_EXEMPLARS.to_string(),
        }
    }
}

fn item(s: &str) -> ItemName {
    ItemName::new(s).expect("universe names are non-empty")
}

fn stack(s: &str, n: u64) -> Stack {
    Stack::new(item(s), n)
}

const MATERIALS: &[&str] = &[
    "iron ingot",
    "copper ingot",
    "gold nugget",
    "string",
    "leather",
    "feather",
    "flint",
    "coal",
    "redstone dust",
    "clay ball",
    "sand",
    "gravel",
    "bone",
    "slime ball",
    "paper",
    "honeycomb",
    "wheat",
    "sugar cane",
    "quartz",
    "glass pane",
];

const GENERICS: &[(&str, &[&str])] = &[
    (
        "planks",
        &[
            "oak planks",
            "birch planks",
            "spruce planks",
            "dark oak planks",
        ],
    ),
    ("wool", &["white wool", "black wool", "red wool"]),
];

const ADJECTIVES: &[&str] = &[
    "polished",
    "reinforced",
    "gilded",
    "carved",
    "woven",
    "tempered",
    "enchanted",
    "rustic",
    "sturdy",
    "ornate",
    "hollow",
    "braided",
    "glazed",
    "etched",
    "lacquered",
    "forged",
    "painted",
    "mossy",
];

const NOUNS: &[&str] = &[
    "lantern", "gear", "frame", "banner", "chest", "lamp", "hinge", "barrel", "bucket", "crate",
    "shield", "helmet", "compass", "clock", "ladder", "bench", "basket", "rope", "trapdoor",
    "lever", "anvil", "cart", "kettle", "mirror", "spindle",
];

impl RecipeUniverse {
    /// A small Minecraft-flavoured universe built around wooden items.
    pub fn sample() -> Self {
        let generics = GenericMap::new(
            GENERICS[..1]
                .iter()
                .map(|(g, specs)| (item(g), specs.iter().map(|s| item(s)).collect()))
                .collect(),
        )
        .expect("valid generics");
        let r = |out: (&str, u64), ings: &[(&str, u64)]| {
            Recipe::new(
                stack(out.0, out.1),
                ings.iter().map(|(s, n)| stack(s, *n)).collect(),
            )
            .expect("valid recipe")
        };
        Self {
            recipes: vec![
                r(("beehive", 1), &[("planks", 6), ("honeycomb", 3)]),
                r(("stick", 4), &[("planks", 2)]),
                r(("crafting table", 1), &[("planks", 4)]),
                r(("chest", 1), &[("planks", 8)]),
                r(("bowl", 4), &[("planks", 3)]),
                r(("torch", 4), &[("coal", 1), ("stick", 1)]),
                r(("ladder", 3), &[("stick", 7)]),
                r(("wooden pickaxe", 1), &[("planks", 3), ("stick", 2)]),
                r(
                    ("campfire", 1),
                    &[("stick", 3), ("coal", 1), ("oak log", 3)],
                ),
            ],
            gettable: [
                "oak planks",
                "birch planks",
                "spruce planks",
                "dark oak planks",
                "honeycomb",
                "coal",
                "oak log",
            ]
            .into_iter()
            .map(item)
            .collect(),
            generics,
        }
    }

    /// A seeded three-tier universe large enough to draw at least fifty
    /// distinct goals at each of depths 1, 2 and 3.
    pub fn synthetic(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let generics = GenericMap::new(
            GENERICS
                .iter()
                .map(|(g, specs)| (item(g), specs.iter().map(|s| item(s)).collect()))
                .collect(),
        )
        .expect("valid generics");
        let mut gettable: BTreeSet<ItemName> = MATERIALS.iter().map(|s| item(s)).collect();
        for (_, specs) in GENERICS {
            gettable.extend(specs.iter().map(|s| item(s)));
        }
        let base: Vec<&str> = MATERIALS
            .iter()
            .copied()
            .chain(GENERICS.iter().map(|(g, _)| *g))
            .collect();

        let mut names: Vec<String> = ADJECTIVES
            .iter()
            .flat_map(|a| NOUNS.iter().map(move |n| format!("{a} {n}")))
            .collect();
        names.shuffle(&mut rng);
        let mut names = names.into_iter();

        const PER_TIER: usize = 80;
        let mut tiers: Vec<Vec<(String, u64)>> = Vec::new();
        let mut recipes = Vec::new();
        for tier in 0..3 {
            let mut made = Vec::new();
            for _ in 0..PER_TIER {
                let name = names.next().expect("enough name combinations");
                let out_count = *[1u64, 1, 1, 2, 4].choose(&mut rng).expect("non-empty");
                let mut ings: Vec<(String, u64)> = Vec::new();
                if tier > 0 {
                    let (lower, lower_count) = tiers[tier - 1]
                        .choose(&mut rng)
                        .expect("previous tier is populated")
                        .clone();
                    // Mostly ask for no more than one craft's worth.
                    let need = if rng.random_bool(0.8) {
                        rng.random_range(1..=lower_count)
                    } else {
                        rng.random_range(lower_count + 1..=lower_count * 2 + 1)
                    };
                    ings.push((lower, need));
                }
                let extra = if tier == 0 {
                    rng.random_range(1..=3)
                } else {
                    rng.random_range(0..=2)
                };
                for b in base.choose_multiple(&mut rng, extra) {
                    ings.push((b.to_string(), rng.random_range(1..=4)));
                }
                let recipe = Recipe::new(
                    stack(&name, out_count),
                    ings.iter().map(|(s, n)| stack(s, *n)).collect(),
                )
                .expect("generated recipes are valid");
                recipes.push(recipe);
                made.push((name, out_count));
            }
            tiers.push(made);
        }
        Self {
            recipes,
            gettable,
            generics,
        }
    }

    fn slot_items(&self, slot: &ItemName) -> Vec<ItemName> {
        if self.generics.is_generic(slot) {
            self.generics.specializations(slot).cloned().collect()
        } else {
            vec![slot.clone()]
        }
    }

    /// Indices of recipes reachable from `goal` through ingredient edges.
    fn closure(&self, goal: &ItemName) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut out = BTreeSet::new();
        let mut stack = vec![goal.clone()];
        while let Some(it) = stack.pop() {
            if !seen.insert(it.clone()) {
                continue;
            }
            for (idx, r) in self.recipes.iter().enumerate() {
                if r.output().item == it {
                    out.insert(idx);
                    for slot in r.ingredients() {
                        stack.extend(self.slot_items(&slot.item));
                    }
                }
            }
        }
        out
    }

    /// Builds a task for `goal` using the given recipe indices.
    fn task_for(
        &self,
        id: String,
        goal: Stack,
        recipe_idx: &[usize],
        exemplar_block: &str,
    ) -> Result<CraftTask, GenerateError> {
        let recipes: Vec<Recipe> = recipe_idx
            .iter()
            .map(|&i| self.recipes[i].clone())
            .collect();
        let mut gettable = BTreeSet::new();
        let mut generics: BTreeMap<ItemName, BTreeSet<ItemName>> = BTreeMap::new();
        for r in &recipes {
            for slot in r.ingredients() {
                if self.generics.is_generic(&slot.item) {
                    let specs: BTreeSet<ItemName> =
                        self.generics.specializations(&slot.item).cloned().collect();
                    gettable.extend(specs.iter().filter(|s| self.gettable.contains(*s)).cloned());
                    generics.insert(slot.item.clone(), specs);
                } else if self.gettable.contains(&slot.item) {
                    gettable.insert(slot.item.clone());
                }
            }
        }
        let generics = GenericMap::new(generics).expect("subset of a valid generic map");
        Ok(CraftTask::new(
            id,
            goal,
            recipes,
            gettable,
            generics,
            exemplar_block,
        )?)
    }
}

/// Draws `n` tasks whose optimal plan contains exactly `depth` craft commands.
pub fn generate_tasks(
    universe: &RecipeUniverse,
    depth: usize,
    n: usize,
    seed: u64,
    options: &GenerateOptions,
) -> Result<Vec<CraftTask>, GenerateError> {
    if depth == 0 {
        return Err(GenerateError::ZeroDepth);
    }
    let mut goals: Vec<&Stack> = Vec::new();
    let mut seen = BTreeSet::new();
    for r in &universe.recipes {
        if seen.insert(&r.output().item) {
            goals.push(r.output());
        }
    }

    let mut candidates = Vec::new();
    for goal in goals {
        let closure: Vec<usize> = universe.closure(&goal.item).into_iter().collect();
        let probe = universe.task_for("probe".into(), goal.clone(), &closure, "")?;
        match bfs_plan(&probe) {
            Ok(plan) if plan.craft_count() == depth => candidates.push((goal.clone(), closure)),
            Ok(_) | Err(PlanError::Unsolvable(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if candidates.len() < n {
        return Err(GenerateError::InsufficientUniverse {
            depth,
            requested: n,
            available: candidates.len(),
        });
    }

    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (depth as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    candidates.shuffle(&mut rng);
    let mut tasks = Vec::with_capacity(n);
    for (i, (goal, closure)) in candidates.into_iter().take(n).enumerate() {
        let mut book = closure.clone();
        if options.distractors > 0 {
            let pool: Vec<usize> = (0..universe.recipes.len())
                .filter(|j| !closure.contains(j))
                .collect();
            book.extend(pool.choose_multiple(&mut rng, options.distractors));
        }
        book.shuffle(&mut rng);
        let id = format!("d{depth}-{i:03}");
        let task = universe.task_for(id, goal, &book, &options.exemplar_block)?;
        let plan = bfs_plan(&task)?;
        debug_assert_eq!(plan.craft_count(), depth);
        tasks.push(task);
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_recipe_universe() {
        let beehive = RecipeUniverse {
            recipes: vec![Recipe::new(
                stack("beehive", 1),
                vec![stack("planks", 6), stack("honeycomb", 3)],
            )
            .unwrap()],
            gettable: ["oak planks", "honeycomb"].into_iter().map(item).collect(),
            generics: crate::env::samples::planks_generics(),
        };
        let tasks = generate_tasks(&beehive, 1, 1, 7, &GenerateOptions::default()).unwrap();
        assert_eq!(tasks.len(), 1);
        let t = &tasks[0];
        assert_eq!(t.goal(), &stack("beehive", 1));
        assert_eq!(
            t.gettable_items(),
            ["oak planks", "honeycomb"].into_iter().map(item).collect()
        );
        assert!(matches!(
            generate_tasks(&beehive, 2, 1, 7, &GenerateOptions::default()),
            Err(GenerateError::InsufficientUniverse { available: 0, .. })
        ));
    }

    #[test]
    fn deterministic_for_seed() {
        let u = RecipeUniverse::sample();
        let a = generate_tasks(&u, 1, 3, 11, &GenerateOptions::default()).unwrap();
        let b = generate_tasks(&u, 1, 3, 11, &GenerateOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn depth_matches_oracle() {
        let u = RecipeUniverse::sample();
        for depth in 1..=3 {
            for t in generate_tasks(&u, depth, 1, 3, &GenerateOptions::default()).unwrap() {
                assert_eq!(bfs_plan(&t).unwrap().craft_count(), depth, "{}", t.id());
            }
        }
    }

    #[test]
    fn synthetic_universe_supports_fifty_per_depth() {
        let u = RecipeUniverse::synthetic(0);
        for depth in 1..=3 {
            let opts = GenerateOptions {
                distractors: 2,
                ..Default::default()
            };
            let tasks = generate_tasks(&u, depth, 50, 5, &opts).unwrap();
            assert_eq!(tasks.len(), 50);
            let goals: BTreeSet<_> = tasks.iter().map(|t| t.goal().item.clone()).collect();
            assert_eq!(goals.len(), 50);
        }
    }

    #[test]
    fn zero_depth_rejected() {
        assert!(matches!(
            generate_tasks(
                &RecipeUniverse::sample(),
                0,
                1,
                0,
                &GenerateOptions::default()
            ),
            Err(GenerateError::ZeroDepth)
        ));
    }
}
