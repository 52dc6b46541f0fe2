//! Prompt assembly and strict reply parsing for the three reflection reply
//! formats, plus the rule choosing which action to execute.

mod decide;
mod reply;
mod template;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use decide::{decide_executed_action, same_action, ExecChoice, Executed, Violation};
pub use reply::{
    parse_reflection, render_reflection, FormatError, ReflectionDecision, SlotVerdict, Verdict,
};
pub use template::{
    build_prompt, format_reminder, BuiltPrompt, PromptTask, PromptTemplate, ReactTemplate,
    TemplateError, TextTask, Turn,
};

/// Which reply stanza a prompt asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatId {
    Webshop,
    Textcraft,
    Alfworld,
}

impl FormatId {
    pub const ALL: [FormatId; 3] = [FormatId::Webshop, FormatId::Textcraft, FormatId::Alfworld];

    pub fn as_str(self) -> &'static str {
        match self {
            FormatId::Webshop => "webshop",
            FormatId::Textcraft => "textcraft",
            FormatId::Alfworld => "alfworld",
        }
    }
}

impl fmt::Display for FormatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormatId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "webshop" => Ok(FormatId::Webshop),
            "textcraft" => Ok(FormatId::Textcraft),
            "alfworld" => Ok(FormatId::Alfworld),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}
