//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rebact_core::env::{parse_command, Command, CraftEnv, Observation, Stack};
use rebact_core::{CraftTask, Inventory, ItemName};

/// Items that can fill a recipe slot.
pub fn slot_items(task: &CraftTask, slot: &ItemName) -> BTreeSet<ItemName> {
    let g = task.generics();
    if g.is_generic(slot) {
        g.specializations(slot).cloned().collect()
    } else {
        BTreeSet::from([slot.clone()])
    }
}

/// Whether a craft command must succeed, computed from first principles:
/// some recipe yields exactly the target count, every slot is restated with
/// its exact count, and the inventory covers the stated items with generic
/// names drawing on whatever specializations are not stated explicitly.
pub fn craft_should_succeed(
    task: &CraftTask,
    inv: &Inventory,
    target: &Stack,
    inputs: &[Stack],
) -> bool {
    let g = task.generics();
    task.recipes()
        .iter()
        .filter(|r| r.output().item == target.item && r.output().count == target.count)
        .any(|recipe| {
            let mut per_slot = vec![0u64; recipe.ingredients().len()];
            for input in inputs {
                let Some(i) = recipe.ingredients().iter().position(|s| {
                    s.item == input.item || slot_items(task, &s.item).contains(&input.item)
                }) else {
                    return false;
                };
                per_slot[i] += input.count;
            }
            if per_slot
                .iter()
                .zip(recipe.ingredients())
                .any(|(n, s)| *n != s.count)
            {
                return false;
            }
            let mut concrete: BTreeMap<&ItemName, u64> = BTreeMap::new();
            let mut generic: BTreeMap<&ItemName, u64> = BTreeMap::new();
            for input in inputs {
                let bucket = if g.is_generic(&input.item) {
                    &mut generic
                } else {
                    &mut concrete
                };
                *bucket.entry(&input.item).or_default() += input.count;
            }
            if concrete.iter().any(|(item, n)| inv.count(item) < *n) {
                return false;
            }
            generic.iter().all(|(name, n)| {
                let free: u64 = g
                    .specializations(name)
                    .map(|s| inv.count(s) - concrete.get(s).copied().unwrap_or(0))
                    .sum();
                free >= *n
            })
        })
}

/// Checks one environment transition against conservation, rejection
/// purity and exact-count matching.
pub fn check_transition(
    task: &CraftTask,
    before: &Inventory,
    text: &str,
    obs: &Observation,
    after: &Inventory,
) -> Result<(), String> {
    let fail = |what: &str| Err(format!("{what}: {text:?} -> {:?}", obs.text));
    if obs.rejected && after != before {
        return fail("rejected command changed the inventory");
    }
    let Ok(cmd) = parse_command(text) else {
        if !obs.rejected || obs.text != format!("Could not execute {}", text.trim()) {
            return fail("unparseable command not rejected verbatim");
        }
        return Ok(());
    };
    match cmd {
        Command::InventoryQuery | Command::Think(_) => {
            if obs.rejected || after != before {
                return fail("query changed state");
            }
        }
        Command::Get(s) => {
            if task.is_gettable(&s.item) == obs.rejected {
                return fail("get outcome disagrees with gettability");
            }
            if !obs.rejected {
                let mut expect = before.clone();
                expect.add(&s.item, s.count);
                if *after != expect || obs.text != format!("Got {} {}", s.count, s.item) {
                    return fail("get did not add exactly the requested stack");
                }
            }
        }
        Command::Craft { target, inputs } => {
            let should = craft_should_succeed(task, before, &target, &inputs);
            if should == obs.rejected {
                return fail(if should {
                    "valid craft rejected"
                } else {
                    "invalid craft accepted"
                });
            }
            if !task
                .recipes_for(&target.item)
                .any(|r| r.output().count == target.count)
                && !obs.rejected
            {
                return fail("craft with a non-recipe count accepted");
            }
            if !obs.rejected {
                let recipe = task
                    .recipes_for(&target.item)
                    .find(|r| r.output().count == target.count)
                    .expect("checked above");
                let mut touched: BTreeSet<ItemName> = BTreeSet::from([target.item.clone()]);
                for slot in recipe.ingredients() {
                    let items = slot_items(task, &slot.item);
                    let used: u64 = items
                        .iter()
                        .map(|i| before.count(i) - after.count(i).min(before.count(i)))
                        .sum();
                    if items.iter().any(|i| after.count(i) > before.count(i)) || used != slot.count
                    {
                        return fail("slot consumption differs from the recipe");
                    }
                    touched.extend(items);
                }
                if after.count(&target.item) != before.count(&target.item) + target.count {
                    return fail("output not added exactly once");
                }
                let others_same = before
                    .iter()
                    .chain(after.iter())
                    .filter(|(i, _)| !touched.contains(*i))
                    .all(|(i, _)| before.count(i) == after.count(i));
                if !others_same {
                    return fail("craft touched an unrelated item");
                }
            }
        }
    }
    Ok(())
}

/// Runs `lines` through a fresh environment, checking every transition.
pub fn check_sequence(task: &std::sync::Arc<CraftTask>, lines: &[String]) -> Result<(), String> {
    let mut env = CraftEnv::new(task.clone());
    for line in lines {
        let before = env.inventory().clone();
        let obs = env.step_text(line);
        check_transition(task, &before, line, &obs, env.inventory())?;
    }
    Ok(())
}

/// Length of the shortest action sequence reaching the goal from an empty
/// inventory, by breadth-first search over abstract states, up to
/// `max_len` actions.
///
/// A get of any item can be made as large as needed, so each item is
/// fetched at most once and then never runs out; states record which items
/// were fetched and the exact stock of crafted items.
pub fn shortest_plan_len(task: &CraftTask, max_len: usize) -> Option<usize> {
    type State = (BTreeSet<ItemName>, BTreeMap<ItemName, u64>);
    let goal = task.goal();
    let gettable: Vec<ItemName> = task.gettable_items().into_iter().collect();
    let have = |s: &State, item: &ItemName| -> u64 {
        if s.0.contains(item) {
            u64::MAX / 4
        } else {
            s.1.get(item).copied().unwrap_or(0)
        }
    };
    let reached = |s: &State| have(s, &goal.item) >= goal.count;

    let start: State = (BTreeSet::new(), BTreeMap::new());
    if reached(&start) {
        return Some(0);
    }
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((state, len)) = queue.pop_front() {
        if len == max_len {
            continue;
        }
        let mut next_states = Vec::new();
        for item in &gettable {
            if !state.0.contains(item) {
                let mut s = state.clone();
                s.0.insert(item.clone());
                next_states.push(s);
            }
        }
        for recipe in task.recipes() {
            // Each slot drawn from a single item suffices: fetched items are
            // unlimited and crafted items never fill generic slots.
            let mut options: Vec<Vec<ItemName>> = Vec::new();
            for slot in recipe.ingredients() {
                options.push(
                    slot_items(task, &slot.item)
                        .into_iter()
                        .filter(|i| have(&state, i) >= slot.count)
                        .collect(),
                );
            }
            let mut combos: Vec<Vec<&ItemName>> = vec![Vec::new()];
            for opts in &options {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        opts.iter().map(move |o| {
                            let mut c = c.clone();
                            c.push(o);
                            c
                        })
                    })
                    .collect();
            }
            for combo in combos {
                let mut s = state.clone();
                let mut ok = true;
                for (item, slot) in combo.iter().zip(recipe.ingredients()) {
                    if !s.0.contains(*item) {
                        let n = s.1.entry((*item).clone()).or_default();
                        if *n < slot.count {
                            ok = false;
                            break;
                        }
                        *n -= slot.count;
                        if *n == 0 {
                            s.1.remove(*item);
                        }
                    }
                }
                if ok {
                    *s.1.entry(recipe.output().item.clone()).or_default() += recipe.output().count;
                    next_states.push(s);
                }
            }
        }
        for s in next_states {
            if reached(&s) {
                return Some(len + 1);
            }
            if seen.insert(s.clone()) {
                queue.push_back((s, len + 1));
            }
        }
    }
    None
}
