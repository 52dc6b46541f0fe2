use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::command::Stack;
use super::item::ItemName;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecipeError {
    #[error("recipe for {0} has a zero count")]
    ZeroCount(ItemName),
    #[error("recipe for {0} has no ingredients")]
    NoIngredients(ItemName),
    #[error("recipe for {output} lists ingredient {ingredient} twice")]
    DuplicateIngredient {
        output: ItemName,
        ingredient: ItemName,
    },
    #[error("recipe for {0} consumes its own output")]
    SelfReferential(ItemName),
}

/// A crafting rule: `ingredients` produce `output`. Ingredient names may be
/// generic (see [`GenericMap`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Recipe {
    output: Stack,
    ingredients: Vec<Stack>,
}

impl Recipe {
    pub fn new(output: Stack, ingredients: Vec<Stack>) -> Result<Self, RecipeError> {
        if ingredients.is_empty() {
            return Err(RecipeError::NoIngredients(output.item));
        }
        if output.count == 0 {
            return Err(RecipeError::ZeroCount(output.item));
        }
        let mut seen = BTreeSet::new();
        for ing in &ingredients {
            if ing.count == 0 {
                return Err(RecipeError::ZeroCount(output.item));
            }
            if ing.item == output.item {
                return Err(RecipeError::SelfReferential(output.item));
            }
            if !seen.insert(&ing.item) {
                return Err(RecipeError::DuplicateIngredient {
                    output: output.item.clone(),
                    ingredient: ing.item.clone(),
                });
            }
        }
        Ok(Self {
            output,
            ingredients,
        })
    }

    pub fn output(&self) -> &Stack {
        &self.output
    }

    pub fn ingredients(&self) -> &[Stack] {
        &self.ingredients
    }
}

/// Renders as a crafting command, e.g. `craft 1 beehive using 6 planks, 3 honeycomb`.
impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "craft {} using ", self.output)?;
        for (i, ing) in self.ingredients.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{ing}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenericMapError {
    #[error("{0} is both a generic name and a specialization")]
    GenericIsSpecialization(ItemName),
    #[error("{item} specializes both {first} and {second}")]
    AmbiguousSpecialization {
        item: ItemName,
        first: ItemName,
        second: ItemName,
    },
    #[error("generic {0} has no specializations")]
    Empty(ItemName),
}

/// Generic ingredient names and the concrete items that satisfy them,
/// e.g. `planks` -> {`oak planks`, `dark oak planks`}.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenericMap {
    generics: BTreeMap<ItemName, BTreeSet<ItemName>>,
    parent: BTreeMap<ItemName, ItemName>,
}

impl GenericMap {
    pub fn new(generics: BTreeMap<ItemName, BTreeSet<ItemName>>) -> Result<Self, GenericMapError> {
        let mut parent = BTreeMap::new();
        for (generic, specs) in &generics {
            if specs.is_empty() {
                return Err(GenericMapError::Empty(generic.clone()));
            }
            for spec in specs {
                if generics.contains_key(spec) {
                    return Err(GenericMapError::GenericIsSpecialization(spec.clone()));
                }
                if let Some(first) = parent.insert(spec.clone(), generic.clone()) {
                    return Err(GenericMapError::AmbiguousSpecialization {
                        item: spec.clone(),
                        first,
                        second: generic.clone(),
                    });
                }
            }
        }
        Ok(Self { generics, parent })
    }

    pub fn is_generic(&self, item: &ItemName) -> bool {
        self.generics.contains_key(item)
    }

    /// Specializations of `generic` in lexicographic order (empty if not generic).
    pub fn specializations(&self, generic: &ItemName) -> impl Iterator<Item = &ItemName> {
        self.generics.get(generic).into_iter().flatten()
    }

    pub fn generic_of(&self, item: &ItemName) -> Option<&ItemName> {
        self.parent.get(item)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ItemName, &BTreeSet<ItemName>)> {
        self.generics.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.generics.is_empty()
    }

    /// True when `item` may fill an ingredient slot named `slot`.
    pub fn satisfies(&self, slot: &ItemName, item: &ItemName) -> bool {
        slot == item || self.generic_of(item) == Some(slot)
    }
}
