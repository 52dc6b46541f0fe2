use crate::env::CraftTask;

use super::FormatId;

const TEXTCRAFT: &str = include_str!("../../templates/textcraft.txt");
const ALFWORLD: &str = include_str!("../../templates/alfworld.txt");
const WEBSHOP: &str = include_str!("../../templates/webshop.txt");
const REACT_TEXTCRAFT: &str = include_str!("../../templates/react_textcraft.txt");

const REFLECTION_MARK: &str = "\n%% reflection\n";
const FIRST_STEP_MARK: &str = "\n%% first_step\n";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template is missing the {0} section")]
    MissingSection(&'static str),
    #[error("template is missing the {{{0}}} slot")]
    MissingSlot(&'static str),
    #[error("reflection window must be at least 1")]
    ZeroWindow,
    #[error("the {format} format reflects exactly one previous action, window {window} requested")]
    FixedWindow { format: FormatId, window: usize },
}

/// What a prompt needs to know about the task being solved.
pub trait PromptTask {
    fn description(&self) -> String;
    fn exemplar_block(&self) -> &str;
}

impl PromptTask for CraftTask {
    fn description(&self) -> String {
        CraftTask::description(self)
    }

    fn exemplar_block(&self) -> &str {
        CraftTask::exemplar_block(self)
    }
}

/// A free-text task, for formats without an in-repo environment.
#[derive(Debug, Clone, Default)]
pub struct TextTask {
    pub description: String,
    pub exemplars: String,
}

impl PromptTask for TextTask {
    fn description(&self) -> String {
        self.description.clone()
    }

    fn exemplar_block(&self) -> &str {
        &self.exemplars
    }
}

/// One executed action and what the environment answered.
pub trait Turn {
    fn action(&self) -> &str;
    fn observation(&self) -> &str;
}

impl<A: AsRef<str>, O: AsRef<str>> Turn for (A, O) {
    fn action(&self) -> &str {
        self.0.as_ref()
    }

    fn observation(&self) -> &str {
        self.1.as_ref()
    }
}

/// A reflect-before-act prompt template.
///
/// The body carries `{reflection}`, `{exemplars}`, `{task}` and `{history}`
/// slots. `{reflection}` is filled with the reflection stanza (slots
/// `{previous_action}` and `{window}`) once an action has been executed,
/// and with the first-step stanza before that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    format: FormatId,
    body: String,
    reflection: String,
    first_step: String,
    window: usize,
}

impl PromptTemplate {
    /// Parses template text: the body, then `%% reflection` and
    /// `%% first_step` section lines.
    pub fn parse(format: FormatId, text: &str, window: usize) -> Result<Self, TemplateError> {
        let (body, rest) = text
            .split_once(REFLECTION_MARK)
            .ok_or(TemplateError::MissingSection("reflection"))?;
        let (reflection, first_step) = rest
            .split_once(FIRST_STEP_MARK)
            .ok_or(TemplateError::MissingSection("first_step"))?;
        let first_step = first_step.strip_suffix('\n').unwrap_or(first_step);
        for (slot, name) in [
            ("{reflection}", "reflection"),
            ("{exemplars}", "exemplars"),
            ("{history}", "history"),
        ] {
            if !body.contains(slot) {
                return Err(TemplateError::MissingSlot(name));
            }
        }
        if !reflection.contains("{previous_action}") {
            return Err(TemplateError::MissingSlot("previous_action"));
        }
        let template = Self {
            format,
            body: body.to_string(),
            reflection: reflection.to_string(),
            first_step: first_step.to_string(),
            window: 1,
        };
        template.with_window(window)
    }

    /// The shipped template for `format`, reflecting one previous action.
    pub fn default_for(format: FormatId) -> Self {
        let text = match format {
            FormatId::Textcraft => TEXTCRAFT,
            FormatId::Alfworld => ALFWORLD,
            FormatId::Webshop => WEBSHOP,
        };
        Self::parse(format, text, 1).expect("shipped templates are valid")
    }

    pub fn with_window(mut self, window: usize) -> Result<Self, TemplateError> {
        if window == 0 {
            return Err(TemplateError::ZeroWindow);
        }
        if self.format != FormatId::Webshop && window != 1 {
            return Err(TemplateError::FixedWindow {
                format: self.format,
                window,
            });
        }
        self.window = window;
        Ok(self)
    }

    /// Fills every slot with literal text, reflecting one previous action.
    /// Useful for inspecting the template itself, e.g. with placeholder
    /// strings in every slot. A body without `{task}` ignores `task` when it
    /// is empty and otherwise puts it before `history`.
    pub fn render_literal(
        &self,
        exemplars: &str,
        task: &str,
        history: &str,
        previous_action: &str,
        window: &str,
    ) -> String {
        let stanza = fill(
            &self.reflection,
            &[("previous_action", previous_action), ("window", window)],
        );
        let history = if self.body.contains("{task}") || task.is_empty() {
            history.to_string()
        } else {
            format!("{task}\n{history}")
        };
        fill(
            &self.body,
            &[
                ("reflection", stanza.as_str()),
                ("exemplars", exemplars),
                ("task", task),
                ("history", history.as_str()),
            ],
        )
    }

    pub fn format(&self) -> FormatId {
        self.format
    }

    pub fn window(&self) -> usize {
        self.window
    }
}

/// The ReAct baseline prompt: exemplars, task and history, one action per reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactTemplate {
    body: String,
}

impl ReactTemplate {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        for (slot, name) in [("{exemplars}", "exemplars"), ("{history}", "history")] {
            if !text.contains(slot) {
                return Err(TemplateError::MissingSlot(name));
            }
        }
        Ok(Self {
            body: text.strip_suffix('\n').unwrap_or(text).to_string(),
        })
    }

    pub fn default_textcraft() -> Self {
        Self::parse(REACT_TEXTCRAFT).expect("shipped template is valid")
    }

    pub fn build(&self, task: &dyn PromptTask, history: &[impl Turn]) -> String {
        fill(&self.body, &slots(&self.body, task, history, ""))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltPrompt {
    pub text: String,
    /// The previous actions the prompt asks the model to judge, oldest first.
    pub reflected: Vec<String>,
    /// True when the window was larger than the executed history.
    pub clamped: bool,
}

/// Assembles a reflect-before-act prompt. The most recent
/// `min(window, history.len())` actions are interpolated into the reflection
/// stanza; with an empty history the first-step stanza is used instead.
pub fn build_prompt(
    template: &PromptTemplate,
    task: &dyn PromptTask,
    history: &[impl Turn],
) -> BuiltPrompt {
    let k = template.window.min(history.len());
    let clamped = !history.is_empty() && template.window > history.len();
    let reflected: Vec<String> = history[history.len() - k..]
        .iter()
        .map(|t| t.action().to_string())
        .collect();

    let stanza = if reflected.is_empty() {
        template.first_step.clone()
    } else {
        render_stanza(&template.reflection, &reflected)
    };
    let text = fill(
        &template.body,
        &slots(&template.body, task, history, &stanza),
    );
    BuiltPrompt {
        text,
        reflected,
        clamped,
    }
}

/// Expands `{window}` and repeats each line holding `{previous_action}` once
/// per reflected action.
fn render_stanza(stanza: &str, reflected: &[String]) -> String {
    let window = reflected.len().to_string();
    let mut out = Vec::new();
    for line in stanza.split('\n') {
        if line.contains("{previous_action}") {
            for (i, action) in reflected.iter().enumerate() {
                let mut l = line;
                if i > 0 {
                    l = l.strip_prefix('"').unwrap_or(l);
                }
                out.push(fill(
                    l,
                    &[("previous_action", action.as_str()), ("window", &window)],
                ));
            }
        } else {
            out.push(fill(line, &[("window", &window)]));
        }
    }
    out.join("\n")
}

fn slots<'a>(
    body: &str,
    task: &'a dyn PromptTask,
    history: &[impl Turn],
    stanza: &'a str,
) -> Vec<(&'static str, String)> {
    let mut turns = history
        .iter()
        .map(|t| format!("> {}\n{}", t.action(), t.observation()))
        .collect::<Vec<_>>()
        .join("\n");
    let description = task.description();
    let mut out = vec![
        ("reflection", stanza.to_string()),
        ("exemplars", task.exemplar_block().to_string()),
    ];
    if body.contains("{task}") {
        out.push(("task", description));
    } else if !description.is_empty() {
        turns = if turns.is_empty() {
            description
        } else {
            format!("{description}\n{turns}")
        };
    }
    out.push(("history", turns));
    out
}

/// Single-pass `{name}` substitution; inserted text is never rescanned and
/// unknown braces are kept verbatim.
fn fill<S: AsRef<str>>(text: &str, values: &[(&str, S)]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let replaced = after.find('}').and_then(|close| {
            let name = &after[..close];
            values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (v.as_ref(), close))
        });
        match replaced {
            Some((value, close)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// One-line reminder appended to a prompt after an unparseable reply.
pub fn format_reminder(format: FormatId, reflected: &[String]) -> String {
    let mut lines = Vec::new();
    for prev in reflected {
        lines.push(match format {
            FormatId::Textcraft => format!(
                "Previous action '{prev}' is [correct or wrong]. It should be modified to: [action]."
            ),
            FormatId::Alfworld => format!(
                "Previous action '{prev}' is [correct or wrong]. To fix this mistake, I should execute: [action]."
            ),
            FormatId::Webshop => format!(
                "Previous action {prev} is [correct or wrong]. This action should be modified to: action[...]"
            ),
        });
    }
    lines.push(match format {
        FormatId::Webshop => "The next action is: action[...]".to_string(),
        _ => "The next action is: [action].".to_string(),
    });
    format!("You must reply in this format: \"{}\"", lines.join("\n"))
}
