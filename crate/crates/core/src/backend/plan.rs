//! Minimum-length crafting plans by uniform-cost search.
//!
//! Any plan can be rewritten so that every `get` happens first and each
//! gettable item is fetched once, which never makes it longer. The search
//! therefore explores craft sequences only, borrowing base items on demand,
//! and charges one action per craft plus one per distinct borrowed item.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use crate::env::{apply, goal_reached, Command, CraftTask, Inventory, ItemName, Stack};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("goal {0} cannot be reached")]
    Unsolvable(Stack),
    #[error("state space limit exceeded while planning for {0}")]
    StateSpaceExceeded(Stack),
    #[error("internal error: plan for {goal} does not reach the goal: {detail}")]
    InvalidPlan { goal: Stack, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerLimits {
    /// States holding more items than this are not expanded.
    pub max_total_items: u64,
    pub max_expansions: usize,
}

impl Default for PlannerLimits {
    fn default() -> Self {
        Self {
            max_total_items: 10_000,
            max_expansions: 200_000,
        }
    }
}

/// An ordered, validated action sequence reaching the task goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    actions: Vec<Command>,
    goal: Stack,
}

impl Plan {
    /// Replays `actions` from `start`; fails unless every step is accepted and
    /// the goal is held at the end.
    pub fn validated(
        task: &CraftTask,
        start: &Inventory,
        actions: Vec<Command>,
    ) -> Result<Self, PlanError> {
        let goal = task.goal().clone();
        let mut inv = start.clone();
        for action in &actions {
            let (obs, next) = apply(task, &inv, action);
            if obs.rejected {
                return Err(PlanError::InvalidPlan {
                    goal,
                    detail: format!("{action}: {}", obs.text),
                });
            }
            inv = next;
        }
        if !goal_reached(&inv, &goal) {
            return Err(PlanError::InvalidPlan {
                goal,
                detail: "goal not held after last action".into(),
            });
        }
        Ok(Self { actions, goal })
    }

    pub fn actions(&self) -> &[Command] {
        &self.actions
    }

    pub fn goal(&self) -> &Stack {
        &self.goal
    }

    pub fn cost(&self) -> usize {
        self.actions.len()
    }

    pub fn craft_count(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| matches!(a, Command::Craft { .. }))
            .count()
    }

    pub fn action_texts(&self) -> Vec<String> {
        self.actions.iter().map(ToString::to_string).collect()
    }
}

pub fn bfs_plan(task: &CraftTask) -> Result<Plan, PlanError> {
    bfs_plan_from(task, &Inventory::new(), PlannerLimits::default())
}

/// Shortest plan from an arbitrary starting inventory.
pub fn bfs_plan_from(
    task: &CraftTask,
    start: &Inventory,
    limits: PlannerLimits,
) -> Result<Plan, PlanError> {
    let goal = task.goal();
    if goal_reached(start, goal) {
        return Plan::validated(task, start, Vec::new());
    }
    if task.is_gettable(&goal.item) {
        let missing = goal.count - start.count(&goal.item);
        return Plan::validated(
            task,
            start,
            vec![Command::Get(Stack::new(goal.item.clone(), missing))],
        );
    }
    if !obtainable(task, start).contains(&goal.item) {
        return Err(PlanError::Unsolvable(goal.clone()));
    }
    let search = Search::new(task, start, limits);
    let actions = search.run()?;
    Plan::validated(task, start, actions)
}

/// Items that can ever be produced: gettable, held, or craftable from those.
fn obtainable(task: &CraftTask, start: &Inventory) -> BTreeSet<ItemName> {
    let mut have: BTreeSet<ItemName> = task.gettable_items();
    have.extend(start.iter().map(|(i, _)| i.clone()));
    loop {
        let mut grew = false;
        for recipe in task.recipes() {
            if have.contains(&recipe.output().item) {
                continue;
            }
            let ok = recipe.ingredients().iter().all(|slot| {
                have.contains(&slot.item)
                    || task
                        .generics()
                        .specializations(&slot.item)
                        .any(|s| have.contains(s))
            });
            if ok {
                have.insert(recipe.output().item.clone());
                grew = true;
            }
        }
        if !grew {
            return have;
        }
    }
}

/// Recipes that can contribute to producing `goal`.
fn relevant_recipes(task: &CraftTask) -> Vec<usize> {
    let mut needed: BTreeSet<&ItemName> = BTreeSet::new();
    let mut frontier = vec![&task.goal().item];
    while let Some(item) = frontier.pop() {
        if !needed.insert(item) {
            continue;
        }
        for recipe in task.recipes_for(item) {
            for slot in recipe.ingredients() {
                frontier.push(&slot.item);
                frontier.extend(task.generics().specializations(&slot.item));
            }
        }
    }
    task.recipes()
        .iter()
        .enumerate()
        .filter(|(_, r)| needed.contains(&r.output().item))
        .map(|(i, _)| i)
        .collect()
}

type Draw = Vec<(ItemName, u64)>;

#[derive(Clone)]
struct Node {
    stock: BTreeMap<ItemName, u64>,
    /// Borrowed base items in first-borrow order.
    borrowed: Vec<(ItemName, u64)>,
    crafts: Vec<Command>,
}

/// Stock and borrowed totals; nodes with equal keys are interchangeable.
type NodeKey = (Vec<(ItemName, u64)>, Vec<(ItemName, u64)>);

impl Node {
    fn cost(&self) -> usize {
        self.crafts.len() + self.borrowed.len()
    }

    fn key(&self) -> NodeKey {
        let mut borrowed = self.borrowed.clone();
        borrowed.sort();
        (
            self.stock.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            borrowed,
        )
    }

    fn total(&self) -> u64 {
        self.stock.values().sum()
    }
}

struct Search<'a> {
    task: &'a CraftTask,
    recipes: Vec<usize>,
    start: &'a Inventory,
    limits: PlannerLimits,
}

impl<'a> Search<'a> {
    fn new(task: &'a CraftTask, start: &'a Inventory, limits: PlannerLimits) -> Self {
        Self {
            task,
            recipes: relevant_recipes(task),
            start,
            limits,
        }
    }

    fn run(&self) -> Result<Vec<Command>, PlanError> {
        let goal = self.task.goal();
        let root = Node {
            stock: self.start.iter().map(|(k, v)| (k.clone(), v)).collect(),
            borrowed: Vec::new(),
            crafts: Vec::new(),
        };
        let mut nodes = vec![root];
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0usize, 0usize)));
        let mut best: HashMap<_, usize> = HashMap::new();
        best.insert(nodes[0].key(), 0);
        let mut pruned = false;
        let mut expansions = 0usize;

        while let Some(Reverse((cost, idx))) = heap.pop() {
            let node = nodes[idx].clone();
            if best.get(&node.key()).is_some_and(|&c| c < cost) {
                continue;
            }
            if node.stock.get(&goal.item).copied().unwrap_or(0) >= goal.count {
                let mut actions: Vec<Command> = node
                    .borrowed
                    .iter()
                    .map(|(item, n)| Command::Get(Stack::new(item.clone(), *n)))
                    .collect();
                actions.extend(node.crafts);
                return Ok(actions);
            }
            expansions += 1;
            if expansions > self.limits.max_expansions {
                return Err(PlanError::StateSpaceExceeded(goal.clone()));
            }
            for child in self.successors(&node) {
                if child.total() > self.limits.max_total_items {
                    pruned = true;
                    continue;
                }
                let c = child.cost();
                let key = child.key();
                if best.get(&key).is_some_and(|&old| old <= c) {
                    continue;
                }
                best.insert(key, c);
                nodes.push(child);
                heap.push(Reverse((c, nodes.len() - 1)));
            }
        }
        if pruned {
            Err(PlanError::StateSpaceExceeded(goal.clone()))
        } else {
            Err(PlanError::Unsolvable(goal.clone()))
        }
    }

    fn successors(&self, node: &Node) -> Vec<Node> {
        let mut out = Vec::new();
        for &ri in &self.recipes {
            let recipe = &self.task.recipes()[ri];
            let options: Vec<Vec<Draw>> = recipe
                .ingredients()
                .iter()
                .map(|slot| self.slot_options(node, slot))
                .collect();
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            for combo in cartesian(&options) {
                if let Some(child) = self.apply_craft(node, ri, &combo) {
                    out.push(child);
                }
            }
        }
        out
    }

    /// Ways of filling one ingredient slot from the node's stock, borrowing
    /// gettable items for any shortfall.
    fn slot_options(&self, node: &Node, slot: &Stack) -> Vec<Draw> {
        let generics = self.task.generics();
        if !generics.is_generic(&slot.item) {
            return vec![vec![(slot.item.clone(), slot.count)]];
        }
        let specs: Vec<&ItemName> = generics.specializations(&slot.item).collect();
        let held = |s: &ItemName| node.stock.get(s).copied().unwrap_or(0);
        let greedy = |need: u64| {
            let mut left = need;
            let mut draw = Draw::new();
            for s in &specs {
                let take = held(s).min(left);
                if take > 0 {
                    draw.push(((*s).clone(), take));
                    left -= take;
                }
            }
            (draw, left)
        };

        let mut options: Vec<Draw> = Vec::new();
        let (from_stock, left) = greedy(slot.count);
        if left == 0 {
            options.push(from_stock.clone());
        }
        for s in specs.iter().filter(|s| self.task.is_gettable(s)) {
            if left > 0 {
                let mut topped = from_stock.clone();
                match topped.iter_mut().find(|(i, _)| i == *s) {
                    Some((_, n)) => *n += left,
                    None => topped.push(((*s).clone(), left)),
                }
                topped.sort();
                options.push(topped);
            }
            options.push(vec![((*s).clone(), slot.count)]);
        }
        options.sort();
        options.dedup();
        options
    }

    fn apply_craft(&self, node: &Node, recipe_idx: usize, draws: &[&Draw]) -> Option<Node> {
        let recipe = &self.task.recipes()[recipe_idx];
        let mut child = node.clone();
        let mut inputs = Vec::new();
        for draw in draws {
            for (item, need) in draw.iter() {
                let held = child.stock.get(item).copied().unwrap_or(0);
                if held < *need {
                    if !self.task.is_gettable(item) {
                        return None;
                    }
                    let extra = need - held;
                    match child.borrowed.iter_mut().find(|(i, _)| i == item) {
                        Some((_, n)) => *n += extra,
                        None => child.borrowed.push((item.clone(), extra)),
                    }
                }
                let after = held.max(*need) - need;
                if after == 0 {
                    child.stock.remove(item);
                } else {
                    child.stock.insert(item.clone(), after);
                }
                inputs.push(Stack::new(item.clone(), *need));
            }
        }
        let out = recipe.output();
        *child.stock.entry(out.item.clone()).or_insert(0) += out.count;
        child.crafts.push(Command::Craft {
            target: out.clone(),
            inputs,
        });
        Some(child)
    }
}

fn cartesian(options: &[Vec<Draw>]) -> Vec<Vec<&Draw>> {
    let mut acc: Vec<Vec<&Draw>> = vec![Vec::new()];
    for slot in options {
        let mut next = Vec::with_capacity(acc.len() * slot.len());
        for prefix in &acc {
            for choice in slot {
                let mut row = prefix.clone();
                row.push(choice);
                next.push(row);
            }
        }
        acc = next;
    }
    acc
}
