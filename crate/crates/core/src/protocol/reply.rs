use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::FormatId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Wrong,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Correct => "correct",
            Verdict::Wrong => "wrong",
        })
    }
}

/// The model's judgement of one previously executed action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotVerdict {
    /// The previous action as quoted in the reply.
    pub previous: String,
    pub verdict: Verdict,
    /// Replacement action. Every reply format requires it; a correct
    /// verdict normally repeats the previous action.
    pub modified: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReflectionDecision {
    pub slots: Vec<SlotVerdict>,
    pub next_action: String,
    pub raw: String,
}

impl ReflectionDecision {
    /// Equality ignoring the raw response text.
    pub fn same_content(&self, other: &Self) -> bool {
        self.slots == other.slots && self.next_action == other.next_action
    }

    pub fn any_wrong(&self) -> bool {
        self.slots.iter().any(|s| s.verdict == Verdict::Wrong)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("reply has no \"The next action is:\" line")]
    MissingNextAction,
    #[error("reply has {0} \"The next action is:\" lines")]
    AmbiguousNextAction(usize),
    #[error("unexpected text before the next action: {0:?}")]
    MissingStanza(String),
    #[error("verdict must be correct or wrong, got {0:?}")]
    InvalidVerdict(String),
    #[error("empty action")]
    EmptyAction,
    #[error("unexpected text after the next action: {0:?}")]
    TrailingText(String),
    #[error("{0:?} is not a click[...] or search[...] action")]
    InvalidAction(String),
    #[error("expected {expected} reflected actions, reply judged {got}")]
    SlotCount { expected: usize, got: usize },
}

const NEXT_MARKER: &str = "The next action is:";

fn slot_regex(format: FormatId) -> &'static Regex {
    static TEXTCRAFT: OnceLock<Regex> = OnceLock::new();
    static ALFWORLD: OnceLock<Regex> = OnceLock::new();
    static WEBSHOP: OnceLock<Regex> = OnceLock::new();
    let (cell, pattern) = match format {
        FormatId::Textcraft => (
            &TEXTCRAFT,
            r"\A\s*Previous action '(?P<prev>[^\n]*)' is\s+(?P<verdict>[A-Za-z]+)\.\s+It should be modified to:[ \t]*(?P<act>[^\n]*)",
        ),
        FormatId::Alfworld => (
            &ALFWORLD,
            r"\A\s*Previous action '(?P<prev>[^\n]*)' is\s+(?P<verdict>[A-Za-z]+)\.\s+To fix this mistake, I should execute:[ \t]*(?P<act>[^\n]*)",
        ),
        FormatId::Webshop => (
            &WEBSHOP,
            r"\A\s*Previous action (?P<prev>[^\n]*?) is\s+(?P<verdict>[A-Za-z]+)\.\s+This action should be modified to:[ \t]*(?P<act>[^\n]*)",
        ),
    };
    cell.get_or_init(|| Regex::new(pattern).expect("static pattern compiles"))
}

fn webshop_action() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\A(click|search)\[[^\n]*\]\z").expect("static pattern compiles"))
}

fn clean_action(raw: &str, format: FormatId) -> Result<String, FormatError> {
    let trimmed = raw.trim();
    let action = trimmed.strip_suffix('.').unwrap_or(trimmed).trim_end();
    if action.is_empty() {
        return Err(FormatError::EmptyAction);
    }
    if format == FormatId::Webshop && !webshop_action().is_match(action) {
        return Err(FormatError::InvalidAction(action.to_string()));
    }
    Ok(action.to_string())
}

fn parse_verdict(raw: &str) -> Result<Verdict, FormatError> {
    if raw.eq_ignore_ascii_case("correct") {
        Ok(Verdict::Correct)
    } else if raw.eq_ignore_ascii_case("wrong") {
        Ok(Verdict::Wrong)
    } else {
        Err(FormatError::InvalidVerdict(raw.to_string()))
    }
}

/// Parses a complete model reply in the given format.
///
/// Zero or more verdict stanzas are followed by exactly one next-action
/// line. Whitespace around parts and the case of the verdict word are
/// tolerated; anything else is a [`FormatError`].
pub fn parse_reflection(text: &str, format: FormatId) -> Result<ReflectionDecision, FormatError> {
    let markers = text.matches(NEXT_MARKER).count();
    if markers == 0 {
        return Err(FormatError::MissingNextAction);
    }
    if markers > 1 {
        return Err(FormatError::AmbiguousNextAction(markers));
    }
    let at = text.find(NEXT_MARKER).expect("marker counted above");
    let (head, tail) = (&text[..at], &text[at + NEXT_MARKER.len()..]);

    let tail = tail.trim();
    if tail.contains('\n') {
        let extra = tail
            .split_once('\n')
            .map(|(_, rest)| rest)
            .unwrap_or_default();
        return Err(FormatError::TrailingText(extra.trim().to_string()));
    }
    let next_action = clean_action(tail, format)?;

    let re = slot_regex(format);
    let mut slots = Vec::new();
    let mut rest = head;
    while !rest.trim().is_empty() {
        let caps = re
            .captures(rest)
            .ok_or_else(|| FormatError::MissingStanza(rest.trim().to_string()))?;
        slots.push(SlotVerdict {
            previous: caps["prev"].trim().to_string(),
            verdict: parse_verdict(&caps["verdict"])?,
            modified: clean_action(&caps["act"], format)?,
        });
        rest = &rest[caps.get(0).expect("whole match").end()..];
    }

    Ok(ReflectionDecision {
        slots,
        next_action,
        raw: text.to_string(),
    })
}

/// Renders a decision in the reply format `parse_reflection` accepts.
pub fn render_reflection(decision: &ReflectionDecision, format: FormatId) -> String {
    let mut out = String::new();
    for slot in &decision.slots {
        let line = match format {
            FormatId::Textcraft => format!(
                "Previous action '{}' is {}. It should be modified to: {}.",
                slot.previous, slot.verdict, slot.modified
            ),
            FormatId::Alfworld => format!(
                "Previous action '{}' is {}. To fix this mistake, I should execute: {}.",
                slot.previous, slot.verdict, slot.modified
            ),
            FormatId::Webshop => format!(
                "Previous action {} is {}. This action should be modified to: {}",
                slot.previous, slot.verdict, slot.modified
            ),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(NEXT_MARKER);
    out.push(' ');
    out.push_str(&decision.next_action);
    if format != FormatId::Webshop {
        out.push('.');
    }
    out
}
