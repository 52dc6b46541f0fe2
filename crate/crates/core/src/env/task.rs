use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::command::Stack;
use super::item::ItemName;
use super::recipe::{GenericMap, GenericMapError, Recipe, RecipeError};

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("task {id}: {source}")]
    Recipe {
        id: String,
        #[source]
        source: RecipeError,
    },
    #[error("task {id}: {source}")]
    Generics {
        id: String,
        #[source]
        source: GenericMapError,
    },
    #[error("task {id}: {item} is both gettable and craftable")]
    GettableCraftable { id: String, item: ItemName },
    #[error("task {id}: recipe graph has a cycle through {item}")]
    Cycle { id: String, item: ItemName },
    #[error("task {id}: goal {item} is neither craftable nor gettable")]
    UnreachableGoal { id: String, item: ItemName },
    #[error("task {id}: goal count must be positive")]
    ZeroGoal { id: String },
    #[error("task {0}: empty id")]
    EmptyId(String),
    #[error("invalid item name in task {id}")]
    ItemName { id: String },
    #[error("duplicate task id {0}")]
    DuplicateId(String),
    #[error("reading task file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing task file {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// One crafting episode: a goal, the recipes shown to the agent, and the base
/// items obtainable with `get`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CraftTask {
    id: String,
    goal: Stack,
    recipes: Vec<Recipe>,
    gettable: BTreeSet<ItemName>,
    generics: GenericMap,
    exemplar_block: String,
}

impl CraftTask {
    pub fn new(
        id: impl Into<String>,
        goal: Stack,
        recipes: Vec<Recipe>,
        gettable: BTreeSet<ItemName>,
        generics: GenericMap,
        exemplar_block: impl Into<String>,
    ) -> Result<Self, TaskError> {
        let task = Self::new_unchecked(id, goal, recipes, gettable, generics, exemplar_block);
        task.validate()?;
        Ok(task)
    }

    /// Builds a task without checking goal reachability or graph invariants.
    /// Intended for exercising solver failure paths.
    pub fn new_unchecked(
        id: impl Into<String>,
        goal: Stack,
        recipes: Vec<Recipe>,
        gettable: BTreeSet<ItemName>,
        generics: GenericMap,
        exemplar_block: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            goal,
            recipes,
            gettable,
            generics,
            exemplar_block: exemplar_block.into(),
        }
    }

    fn validate(&self) -> Result<(), TaskError> {
        let id = || self.id.clone();
        if self.id.trim().is_empty() {
            return Err(TaskError::EmptyId(self.id.clone()));
        }
        if self.goal.count == 0 {
            return Err(TaskError::ZeroGoal { id: id() });
        }
        for recipe in &self.recipes {
            let out = &recipe.output().item;
            if self.is_gettable(out) {
                return Err(TaskError::GettableCraftable {
                    id: id(),
                    item: out.clone(),
                });
            }
        }
        if let Some(item) = self.find_cycle() {
            return Err(TaskError::Cycle { id: id(), item });
        }
        if !self.is_gettable(&self.goal.item) && self.recipes_for(&self.goal.item).next().is_none()
        {
            return Err(TaskError::UnreachableGoal {
                id: id(),
                item: self.goal.item.clone(),
            });
        }
        Ok(())
    }

    /// Concrete items an ingredient slot expands to.
    fn slot_items<'a>(&'a self, slot: &'a ItemName) -> Vec<&'a ItemName> {
        if self.generics.is_generic(slot) {
            self.generics.specializations(slot).collect()
        } else {
            vec![slot]
        }
    }

    fn find_cycle(&self) -> Option<ItemName> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn visit<'a>(
            task: &'a CraftTask,
            item: &'a ItemName,
            marks: &mut BTreeMap<&'a ItemName, Mark>,
        ) -> Option<ItemName> {
            match marks.get(item) {
                Some(Mark::Done) => return None,
                Some(Mark::Active) => return Some(item.clone()),
                None => {}
            }
            marks.insert(item, Mark::Active);
            for recipe in task.recipes_for(item) {
                for ing in recipe.ingredients() {
                    for child in task.slot_items(&ing.item) {
                        if let Some(hit) = visit(task, child, marks) {
                            return Some(hit);
                        }
                    }
                }
            }
            marks.insert(item, Mark::Done);
            None
        }
        let mut marks = BTreeMap::new();
        self.recipes
            .iter()
            .find_map(|r| visit(self, &r.output().item, &mut marks))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn goal(&self) -> &Stack {
        &self.goal
    }

    pub fn recipes(&self) -> &[Recipe] {
        &self.recipes
    }

    pub fn recipes_for<'a>(&'a self, item: &'a ItemName) -> impl Iterator<Item = &'a Recipe> {
        self.recipes
            .iter()
            .filter(move |r| &r.output().item == item)
    }

    pub fn gettable(&self) -> &BTreeSet<ItemName> {
        &self.gettable
    }

    pub fn generics(&self) -> &GenericMap {
        &self.generics
    }

    pub fn exemplar_block(&self) -> &str {
        &self.exemplar_block
    }

    /// Gettable items plus every specialization of a gettable generic.
    /// Generic names themselves are never fetched.
    pub fn is_gettable(&self, item: &ItemName) -> bool {
        if self.generics.is_generic(item) {
            return false;
        }
        self.gettable.contains(item)
            || self
                .generics
                .generic_of(item)
                .is_some_and(|g| self.gettable.contains(g))
    }

    /// Concrete gettable items in lexicographic order.
    pub fn gettable_items(&self) -> BTreeSet<ItemName> {
        let mut out = BTreeSet::new();
        for item in &self.gettable {
            if self.generics.is_generic(item) {
                out.extend(self.generics.specializations(item).cloned());
            } else {
                out.insert(item.clone());
            }
        }
        out
    }

    /// The task text shown to the agent.
    pub fn description(&self) -> String {
        let mut out = String::from("Crafting commands:\n");
        for recipe in &self.recipes {
            out.push_str(&recipe.to_string());
            out.push('\n');
        }
        out.push_str(&format!("Goal: craft {}.", self.goal));
        out
    }
}

// On-disk representation.

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StackRecord {
    item: String,
    count: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecipeRecord {
    output: StackRecord,
    ingredients: Vec<StackRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaskRecord {
    id: String,
    goal: StackRecord,
    recipes: Vec<RecipeRecord>,
    gettable: Vec<String>,
    #[serde(default)]
    generics: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    exemplar_block: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TaskFile {
    Many(Vec<TaskRecord>),
    One(TaskRecord),
}

impl StackRecord {
    fn from_stack(s: &Stack) -> Self {
        Self {
            item: s.item.to_string(),
            count: s.count,
        }
    }

    fn to_stack(&self, id: &str) -> Result<Stack, TaskError> {
        let item = ItemName::new(&self.item).map_err(|_| TaskError::ItemName { id: id.into() })?;
        Ok(Stack::new(item, self.count))
    }
}

impl TaskRecord {
    fn from_task(task: &CraftTask) -> Self {
        Self {
            id: task.id.clone(),
            goal: StackRecord::from_stack(&task.goal),
            recipes: task
                .recipes
                .iter()
                .map(|r| RecipeRecord {
                    output: StackRecord::from_stack(r.output()),
                    ingredients: r
                        .ingredients()
                        .iter()
                        .map(StackRecord::from_stack)
                        .collect(),
                })
                .collect(),
            gettable: task.gettable.iter().map(|i| i.to_string()).collect(),
            generics: task
                .generics
                .iter()
                .map(|(g, s)| (g.to_string(), s.iter().map(|i| i.to_string()).collect()))
                .collect(),
            exemplar_block: task.exemplar_block.clone(),
        }
    }

    fn into_task(self) -> Result<CraftTask, TaskError> {
        let id = self.id;
        let name = |s: &str| ItemName::new(s).map_err(|_| TaskError::ItemName { id: id.clone() });
        let goal = self.goal.to_stack(&id)?;
        let recipes = self
            .recipes
            .iter()
            .map(|r| {
                let output = r.output.to_stack(&id)?;
                let ingredients = r
                    .ingredients
                    .iter()
                    .map(|s| s.to_stack(&id))
                    .collect::<Result<Vec<_>, _>>()?;
                Recipe::new(output, ingredients).map_err(|source| TaskError::Recipe {
                    id: id.clone(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let gettable = self
            .gettable
            .iter()
            .map(|s| name(s))
            .collect::<Result<BTreeSet<_>, _>>()?;
        let mut generic_sets = BTreeMap::new();
        for (g, specs) in &self.generics {
            let specs = specs
                .iter()
                .map(|s| name(s))
                .collect::<Result<BTreeSet<_>, _>>()?;
            generic_sets.insert(name(g)?, specs);
        }
        let generics = GenericMap::new(generic_sets).map_err(|source| TaskError::Generics {
            id: id.clone(),
            source,
        })?;
        CraftTask::new(
            id.clone(),
            goal,
            recipes,
            gettable,
            generics,
            self.exemplar_block,
        )
    }
}

/// Parses a task file: either a single task object or an array of them.
pub fn parse_tasks(json: &str) -> Result<Vec<CraftTask>, serde_json::Error> {
    let file: TaskFile = serde_json::from_str(json)?;
    let records = match file {
        TaskFile::Many(v) => v,
        TaskFile::One(t) => vec![t],
    };
    records
        .into_iter()
        .map(|r| r.into_task().map_err(serde::de::Error::custom))
        .collect()
}

pub fn load_tasks(path: impl AsRef<Path>) -> Result<Vec<CraftTask>, TaskError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| TaskError::Io {
        path: shown.clone(),
        source,
    })?;
    let tasks = parse_tasks(&text).map_err(|source| TaskError::Json {
        path: shown,
        source,
    })?;
    let mut ids = BTreeSet::new();
    for t in &tasks {
        if !ids.insert(t.id()) {
            return Err(TaskError::DuplicateId(t.id().to_string()));
        }
    }
    Ok(tasks)
}

pub fn tasks_to_json(tasks: &[CraftTask]) -> String {
    let records: Vec<_> = tasks.iter().map(TaskRecord::from_task).collect();
    serde_json::to_string_pretty(&records).expect("task records always serialize")
}
