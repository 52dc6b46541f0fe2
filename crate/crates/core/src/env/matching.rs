use std::collections::BTreeMap;
use std::fmt;

use super::command::Stack;
use super::inventory::Inventory;
use super::item::ItemName;
use super::recipe::Recipe;
use super::task::CraftTask;

/// A matched craft: which recipe fired and exactly what it consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CraftPlan {
    pub recipe: Recipe,
    /// Concrete items consumed, lexicographic by item.
    pub consumed: Vec<Stack>,
    pub produced: Stack,
}

/// Why a craft command was refused. `Display` is the observation text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CraftRejection {
    NoSuchRecipe { item: ItemName },
    CountMismatch { target: Stack, produces: u64 },
    IngredientMismatch { item: ItemName },
    MissingIngredients { item: ItemName, missing: Vec<Stack> },
}

impl fmt::Display for CraftRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CraftRejection::NoSuchRecipe { item } => {
                write!(f, "Could not find a valid recipe for {item}")
            }
            CraftRejection::CountMismatch { target, produces } => write!(
                f,
                "Could not craft {target}: the recipe produces {produces} {}",
                target.item
            ),
            CraftRejection::IngredientMismatch { item } => {
                write!(
                    f,
                    "Could not craft {item}: ingredients do not match the recipe"
                )
            }
            CraftRejection::MissingIngredients { item, missing } => {
                write!(f, "Could not craft {item}: missing ")?;
                for (i, s) in missing.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
        }
    }
}

/// Matches a craft command against the task's recipe book.
///
/// The command must ask for exactly one recipe's output count and must restate
/// every ingredient slot with the recipe's counts. A generic slot may be
/// restated with any mix of its specializations, or with the generic name
/// itself; in the latter case specializations are drawn in lexicographic order.
pub fn match_recipe(
    target: &Stack,
    inputs: &[Stack],
    task: &CraftTask,
    inv: &Inventory,
) -> Result<CraftPlan, CraftRejection> {
    let mut candidates = task.recipes_for(&target.item).peekable();
    let Some(first) = candidates.peek() else {
        return Err(CraftRejection::NoSuchRecipe {
            item: target.item.clone(),
        });
    };
    let first_count = first.output().count;
    let exact: Vec<&Recipe> = candidates
        .filter(|r| r.output().count == target.count)
        .collect();
    if exact.is_empty() {
        return Err(CraftRejection::CountMismatch {
            target: target.clone(),
            produces: first_count,
        });
    }

    let mut fallback = None;
    for recipe in exact {
        match match_one(recipe, inputs, task, inv) {
            Ok(plan) => return Ok(plan),
            Err(e @ CraftRejection::MissingIngredients { .. }) => {
                if !matches!(fallback, Some(CraftRejection::MissingIngredients { .. })) {
                    fallback = Some(e);
                }
            }
            Err(e) => {
                fallback.get_or_insert(e);
            }
        }
    }
    Err(fallback.expect("at least one candidate recipe was tried"))
}

fn match_one(
    recipe: &Recipe,
    inputs: &[Stack],
    task: &CraftTask,
    inv: &Inventory,
) -> Result<CraftPlan, CraftRejection> {
    let generics = task.generics();
    let item = &recipe.output().item;
    let mismatch = || CraftRejection::IngredientMismatch { item: item.clone() };

    let slots = recipe.ingredients();
    let mut stated = vec![0u64; slots.len()];
    let mut concrete: BTreeMap<&ItemName, u64> = BTreeMap::new();
    // Generic-named requests, in slot order.
    let mut by_generic: Vec<(&ItemName, u64)> = Vec::new();

    for input in inputs {
        let slot_idx = slots
            .iter()
            .position(|slot| generics.satisfies(&slot.item, &input.item))
            .ok_or_else(mismatch)?;
        stated[slot_idx] += input.count;
        if generics.is_generic(&input.item) {
            match by_generic.iter_mut().find(|(g, _)| *g == &input.item) {
                Some((_, n)) => *n += input.count,
                None => by_generic.push((&input.item, input.count)),
            }
        } else {
            *concrete.entry(&input.item).or_insert(0) += input.count;
        }
    }
    if stated.iter().zip(slots).any(|(n, slot)| *n != slot.count) {
        return Err(mismatch());
    }

    let mut missing = Vec::new();
    let mut consumed: BTreeMap<ItemName, u64> = BTreeMap::new();
    for (&name, &need) in &concrete {
        let have = inv.count(name);
        if have < need {
            missing.push(Stack::new(name.clone(), need - have));
        }
        consumed.insert(name.clone(), need);
    }
    for &(generic, need) in &by_generic {
        let mut remaining = need;
        let mut draws = Vec::new();
        for spec in generics.specializations(generic) {
            let reserved = consumed.get(spec).copied().unwrap_or(0);
            let free = inv.count(spec).saturating_sub(reserved);
            let take = free.min(remaining);
            if take > 0 {
                draws.push((spec.clone(), take));
                remaining -= take;
            }
            if remaining == 0 {
                break;
            }
        }
        if remaining > 0 {
            missing.push(Stack::new(generic.clone(), remaining));
        } else {
            for (spec, take) in draws {
                *consumed.entry(spec).or_insert(0) += take;
            }
        }
    }
    if !missing.is_empty() {
        return Err(CraftRejection::MissingIngredients {
            item: item.clone(),
            missing,
        });
    }

    Ok(CraftPlan {
        recipe: recipe.clone(),
        consumed: consumed
            .into_iter()
            .map(|(item, count)| Stack::new(item, count))
            .collect(),
        produced: recipe.output().clone(),
    })
}
