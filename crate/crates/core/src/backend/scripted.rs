use super::{Backend, BackendError, CompletionRequest};

/// Splits a script into responses. Records are separated by lines holding
/// only `---`.
pub fn parse_script(text: &str) -> Vec<String> {
    let mut records = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim_end_matches('\r') == "---" {
            records.push(current.join("\n"));
            current.clear();
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        records.push(current.join("\n"));
    }
    records
}

/// Replays fixed responses in order, ignoring the prompt.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    responses: Vec<String>,
    cursor: usize,
}

impl ScriptedBackend {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self {
            responses: responses.into_iter().map(Into::into).collect(),
            cursor: 0,
        }
    }

    pub fn from_script(text: &str) -> Self {
        Self::new(parse_script(text))
    }

    pub fn remaining(&self) -> usize {
        self.responses.len() - self.cursor
    }
}

impl Backend for ScriptedBackend {
    fn complete(&mut self, _req: &CompletionRequest) -> Result<String, BackendError> {
        let out = self
            .responses
            .get(self.cursor)
            .cloned()
            .ok_or_else(|| BackendError::Unavailable("script exhausted".into()))?;
        self.cursor += 1;
        Ok(out)
    }
}
