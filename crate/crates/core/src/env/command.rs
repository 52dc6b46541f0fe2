use std::fmt;

use super::item::ItemName;

/// An item name paired with a positive count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stack {
    pub item: ItemName,
    pub count: u64,
}

impl Stack {
    pub fn new(item: ItemName, count: u64) -> Self {
        Self { item, count }
    }
}

impl fmt::Display for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.count, self.item)
    }
}

/// A parsed environment action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Craft { target: Stack, inputs: Vec<Stack> },
    Get(Stack),
    InventoryQuery,
    Think(String),
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Craft { target, inputs } => {
                write!(f, "craft {target} using ")?;
                for (i, input) in inputs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{input}")?;
                }
                Ok(())
            }
            Command::Get(stack) => write!(f, "get {stack}"),
            Command::InventoryQuery => f.write_str("inventory"),
            Command::Think(text) => write!(f, "think: {text}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unparseable command {text:?}: {reason}")]
pub struct UnparseableCommand {
    pub text: String,
    pub reason: &'static str,
}

/// Parses one action line.
///
/// Grammar (verbs are case-insensitive, item names are normalized):
///
/// ```text
/// craft <n> <item> using <n> <item>[, <n> <item>]* [and <n> <item>]
/// get <n> <item>
/// inventory
/// think: <free text>
/// ```
pub fn parse_command(text: &str) -> Result<Command, UnparseableCommand> {
    let line = text.trim();
    let fail = |reason| UnparseableCommand {
        text: line.to_string(),
        reason,
    };

    if line.len() >= 6 && line.is_char_boundary(6) && line[..6].eq_ignore_ascii_case("think:") {
        let thought = line[6..].trim();
        if thought.is_empty() {
            return Err(fail("empty thought"));
        }
        return Ok(Command::Think(thought.to_string()));
    }

    let lowered = line.to_lowercase();
    let spaced = lowered.replace(',', " , ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let Some((&verb, rest)) = tokens.split_first() else {
        return Err(fail("empty command"));
    };

    match verb {
        "inventory" if rest.is_empty() => Ok(Command::InventoryQuery),
        "inventory" => Err(fail("inventory takes no arguments")),
        "get" => parse_stack(rest).map(Command::Get).map_err(fail),
        "craft" => {
            let using = rest
                .iter()
                .position(|t| *t == "using")
                .ok_or_else(|| fail("craft without a using clause"))?;
            let target = parse_stack(&rest[..using]).map_err(fail)?;
            let inputs = rest[using + 1..]
                .split(|t| *t == "," || *t == "and")
                .filter(|group| !group.is_empty())
                .map(parse_stack)
                .collect::<Result<Vec<_>, _>>()
                .map_err(fail)?;
            if inputs.is_empty() {
                return Err(fail("craft without ingredients"));
            }
            Ok(Command::Craft { target, inputs })
        }
        _ => Err(fail("unknown verb")),
    }
}

fn parse_stack(tokens: &[&str]) -> Result<Stack, &'static str> {
    let Some((&count, name)) = tokens.split_first() else {
        return Err("missing count");
    };
    if !count.bytes().all(|b| b.is_ascii_digit()) {
        return Err("missing count");
    }
    let count: u64 = count.parse().map_err(|_| "count out of range")?;
    if count == 0 {
        return Err("count must be positive");
    }
    if name.iter().any(|t| *t == "using" || *t == ",") {
        return Err("malformed item name");
    }
    let item = ItemName::new(&name.join(" ")).map_err(|_| "empty item name")?;
    Ok(Stack { item, count })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack(item: &str, count: u64) -> Stack {
        Stack::new(ItemName::new(item).unwrap(), count)
    }

    #[test]
    fn craft_with_comma_list() {
        let cmd = parse_command("craft 1 beehive using 6 oak planks, 3 honeycomb").unwrap();
        assert_eq!(
            cmd,
            Command::Craft {
                target: stack("beehive", 1),
                inputs: vec![stack("oak planks", 6), stack("honeycomb", 3)],
            }
        );
    }

    #[test]
    fn craft_with_and_separator() {
        let cmd = parse_command("craft 1 beehive using 6 oak planks and 3 honeycomb").unwrap();
        let Command::Craft { inputs, .. } = cmd else {
            panic!("expected craft");
        };
        assert_eq!(inputs, vec![stack("oak planks", 6), stack("honeycomb", 3)]);

        let cmd = parse_command("craft 1 x using 1 a, 2 b, and 3 c").unwrap();
        let Command::Craft { inputs, .. } = cmd else {
            panic!("expected craft");
        };
        assert_eq!(inputs.len(), 3);
    }

    #[test]
    fn simple_verbs() {
        assert_eq!(parse_command("inventory").unwrap(), Command::InventoryQuery);
        assert_eq!(parse_command("Inventory").unwrap(), Command::InventoryQuery);
        assert_eq!(
            parse_command("get 3 honeycomb").unwrap(),
            Command::Get(stack("honeycomb", 3))
        );
        assert_eq!(
            parse_command("think: I need planks").unwrap(),
            Command::Think("I need planks".into())
        );
    }

    #[test]
    fn rejections() {
        for bad in [
            "make 1 stick",
            "get honeycomb",
            "get 0 honeycomb",
            "get -1 honeycomb",
            "get 3",
            "craft 1 stick",
            "craft 1 stick using",
            "craft 1 stick using planks",
            "think:   ",
            "",
            "inventory please",
            "get 99999999999999999999999 dirt",
        ] {
            assert!(parse_command(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn display_is_reparseable() {
        let text = "craft 4 stick using 2 birch planks";
        assert_eq!(parse_command(text).unwrap().to_string(), text);
        assert_eq!(
            parse_command("craft 1 beehive using 6 oak planks and 3 honeycomb")
                .unwrap()
                .to_string(),
            "craft 1 beehive using 6 oak planks, 3 honeycomb"
        );
    }
}
