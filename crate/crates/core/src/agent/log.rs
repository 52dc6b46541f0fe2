use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::EntrySource;
use crate::protocol::{Verdict, Violation};

/// One model call. Field order is the serialized order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub episode_id: String,
    /// Index of the environment step this call belongs to.
    pub step: usize,
    pub call_index: usize,
    pub prompt_sha256: String,
    pub response: String,
    pub parsed: Option<ParsedRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    pub exec: Option<ExecRecord>,
    pub observation: Option<String>,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedRecord {
    pub verdicts: Vec<Verdict>,
    pub modified: Vec<String>,
    pub next: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecRecord {
    pub action: String,
    pub source: EntrySource,
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discarded: Option<String>,
}

/// Sink for call records.
pub trait CallLog {
    fn record(&mut self, rec: &CallRecord) -> io::Result<()>;

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl CallLog for Vec<CallRecord> {
    fn record(&mut self, rec: &CallRecord) -> io::Result<()> {
        self.push(rec.clone());
        Ok(())
    }
}

/// Writes one JSON object per line.
pub struct JsonlLog<W: Write> {
    out: W,
}

impl<W: Write> JsonlLog<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> CallLog for JsonlLog<W> {
    fn record(&mut self, rec: &CallRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, rec)?;
        self.out.write_all(b"\n")
    }

    fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}
