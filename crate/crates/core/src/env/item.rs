use std::fmt;

use serde::{Deserialize, Serialize};

/// Canonical item name: lowercase, single-spaced, never empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ItemName(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("item name is empty")]
pub struct EmptyItemName;

impl ItemName {
    pub fn new(raw: &str) -> Result<Self, EmptyItemName> {
        let canonical = raw
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ");
        if canonical.is_empty() {
            return Err(EmptyItemName);
        }
        Ok(Self(canonical))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ItemName {
    type Error = EmptyItemName;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(&value)
    }
}

impl TryFrom<&str> for ItemName {
    type Error = EmptyItemName;

    fn try_from(value: &str) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ItemName> for String {
    fn from(value: ItemName) -> Self {
        value.0
    }
}

impl fmt::Display for ItemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ItemName {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_case_and_spacing() {
        let name = ItemName::new("  Dark   Oak\tPlanks ").unwrap();
        assert_eq!(name.as_str(), "dark oak planks");
        assert_eq!(name, ItemName::new("dark oak planks").unwrap());
    }

    #[test]
    fn rejects_blank() {
        assert_eq!(ItemName::new("   "), Err(EmptyItemName));
    }
}
