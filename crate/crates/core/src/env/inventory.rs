use std::collections::BTreeMap;

use super::command::Stack;
use super::item::ItemName;

/// Multiset of owned items. Zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Inventory {
    items: BTreeMap<ItemName, u64>,
}

impl Inventory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, item: &ItemName) -> u64 {
        self.items.get(item).copied().unwrap_or(0)
    }

    pub fn add(&mut self, item: &ItemName, count: u64) {
        if count == 0 {
            return;
        }
        *self.items.entry(item.clone()).or_insert(0) += count;
    }

    /// Removes `count` of `item`. Returns false (and changes nothing) when
    /// fewer are held.
    pub fn remove(&mut self, item: &ItemName, count: u64) -> bool {
        let held = self.count(item);
        if held < count {
            return false;
        }
        if held == count {
            self.items.remove(item);
        } else if count > 0 {
            self.items.insert(item.clone(), held - count);
        }
        true
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Items in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&ItemName, u64)> {
        self.items.iter().map(|(k, v)| (k, *v))
    }

    pub fn total(&self) -> u64 {
        self.items.values().sum()
    }
}

impl FromIterator<Stack> for Inventory {
    fn from_iter<T: IntoIterator<Item = Stack>>(iter: T) -> Self {
        let mut inv = Inventory::new();
        for stack in iter {
            inv.add(&stack.item, stack.count);
        }
        inv
    }
}

/// `Inventory: 3 honeycomb, 6 oak planks`, or `Inventory: empty`.
pub fn render_inventory(inv: &Inventory) -> String {
    if inv.is_empty() {
        return "Inventory: empty".to_string();
    }
    let listing = inv
        .iter()
        .map(|(item, count)| format!("{count} {item}"))
        .collect::<Vec<_>>()
        .join(", ");
    format!("Inventory: {listing}")
}
