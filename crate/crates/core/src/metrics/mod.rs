//! Aggregation of episode results and log recounting.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{CallRecord, EntrySource, EpisodeResult};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("no episode results to aggregate")]
    EmptyInput,
    #[error("results mix methods {0} and {1}")]
    MixedMethods(String, String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt log {path} at line {line}: {source}")]
    CorruptLog {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Raw totals; every summary figure derives from these.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub episodes: usize,
    pub successes: usize,
    pub score_sum: u64,
    pub llm_calls: usize,
    pub steps: usize,
    pub modifications: usize,
    pub retries: usize,
}

impl Counters {
    pub fn add(&mut self, r: &EpisodeResult) {
        self.episodes += 1;
        self.successes += usize::from(r.success);
        self.score_sum += u64::from(r.score);
        self.llm_calls += r.llm_calls;
        self.steps += r.steps;
        self.modifications += r.modifications;
        self.retries += r.retries;
    }

    pub fn merge(&self, other: &Counters) -> Counters {
        Counters {
            episodes: self.episodes + other.episodes,
            successes: self.successes + other.successes,
            score_sum: self.score_sum + other.score_sum,
            llm_calls: self.llm_calls + other.llm_calls,
            steps: self.steps + other.steps,
            modifications: self.modifications + other.modifications,
            retries: self.retries + other.retries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub n_tasks: usize,
    /// Percent of successful episodes.
    pub success_rate: f64,
    pub avg_score: f64,
    pub avg_llm_calls: f64,
    /// Modifications over executed actions, pooled across episodes.
    pub modification_proportion: f64,
    pub avg_retries: f64,
}

impl Summary {
    pub fn from_counters(method: impl Into<String>, c: &Counters) -> Result<Self, MetricsError> {
        if c.episodes == 0 {
            return Err(MetricsError::EmptyInput);
        }
        let n = c.episodes as f64;
        Ok(Summary {
            method: method.into(),
            n_tasks: c.episodes,
            success_rate: 100.0 * c.successes as f64 / n,
            avg_score: c.score_sum as f64 / n,
            avg_llm_calls: c.llm_calls as f64 / n,
            modification_proportion: if c.steps == 0 {
                0.0
            } else {
                c.modifications as f64 / c.steps as f64
            },
            avg_retries: c.retries as f64 / n,
        })
    }
}

pub fn count(results: &[EpisodeResult]) -> Counters {
    let mut c = Counters::default();
    for r in results {
        c.add(r);
    }
    c
}

pub fn aggregate(results: &[EpisodeResult], label: &str) -> Result<Summary, MetricsError> {
    let first = results.first().ok_or(MetricsError::EmptyInput)?;
    if let Some(other) = results.iter().find(|r| r.method != first.method) {
        return Err(MetricsError::MixedMethods(
            first.method.to_string(),
            other.method.to_string(),
        ));
    }
    Summary::from_counters(label, &count(results))
}

/// Two-decimal, half-up display rounding.
///
/// A relative nudge keeps values such as 0.125 or 1.005, which binary
/// floating point stores slightly low, rounding up as written.
pub fn round2(x: f64) -> String {
    let scaled = x * 100.0;
    let nudged = scaled + scaled.abs().max(1.0) * 1e-9;
    let r = nudged.round() / 100.0;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.2}")
}

pub const CSV_HEADER: [&str; 7] = [
    "method",
    "n_tasks",
    "success_rate",
    "avg_score",
    "avg_llm_calls",
    "modification_proportion",
    "avg_retries",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub table: String,
    pub csv: String,
}

fn row(s: &Summary) -> [String; 7] {
    [
        s.method.clone(),
        s.n_tasks.to_string(),
        round2(s.success_rate),
        round2(s.avg_score),
        round2(s.avg_llm_calls),
        round2(s.modification_proportion),
        round2(s.avg_retries),
    ]
}

/// Renders summaries as a fixed-width table and as CSV carrying the same
/// rounded values.
pub fn render_summary(summaries: &[Summary]) -> Rendered {
    const TABLE_HEADER: [&str; 7] = ["method", "n", "SR", "score", "calls", "mod_prop", "retries"];
    let rows: Vec<[String; 7]> = summaries.iter().map(row).collect();

    let mut widths: Vec<usize> = TABLE_HEADER.iter().map(|h| h.len()).collect();
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[&str]| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                out.push_str(&format!("{cell:<w$}"));
            } else {
                out.push_str(&format!("  {cell:>w$}"));
            }
        }
        out.push('\n');
        out
    };
    let mut table = line(&TABLE_HEADER);
    for r in &rows {
        table.push_str(&line(&r.iter().map(String::as_str).collect::<Vec<_>>()));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("writing to memory");
    for r in &rows {
        w.write_record(r).expect("writing to memory");
    }
    let csv = String::from_utf8(w.into_inner().expect("flushing to memory"))
        .expect("csv output is utf-8");
    Rendered { table, csv }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, MetricsError> {
    let io_err = |source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|source| MetricsError::CorruptLog {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Reads a per-episode call log written by the agent.
pub fn read_trajectory_log(path: impl AsRef<Path>) -> Result<Vec<CallRecord>, MetricsError> {
    read_jsonl(path.as_ref())
}

/// Reads a results file: one episode result per line.
pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<EpisodeResult>, MetricsError> {
    read_jsonl(path.as_ref())
}

/// Counters recomputed from a call log.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Recount {
    pub llm_calls: usize,
    pub steps: usize,
    pub modifications: usize,
    pub retries: usize,
}

pub fn recount(records: &[CallRecord]) -> Recount {
    let mut c = Recount {
        llm_calls: records.len(),
        ..Recount::default()
    };
    for r in records {
        match &r.exec {
            Some(exec) => {
                c.steps += 1;
                if exec.source == EntrySource::Modified {
                    c.modifications += 1;
                }
            }
            None => c.retries += 1,
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("episode {episode}: {field} is {recorded} in results but {recounted} in the log")]
pub struct IntegrityError {
    pub episode: String,
    pub field: &'static str,
    pub recorded: usize,
    pub recounted: usize,
}

/// Checks an episode result against the counters recomputed from its log.
pub fn check_consistency(
    result: &EpisodeResult,
    records: &[CallRecord],
) -> Result<(), IntegrityError> {
    let c = recount(records);
    let pairs = [
        ("llm_calls", result.llm_calls, c.llm_calls),
        ("steps", result.steps, c.steps),
        ("modifications", result.modifications, c.modifications),
        ("retries", result.retries, c.retries),
    ];
    for (field, recorded, recounted) in pairs {
        if recorded != recounted {
            return Err(IntegrityError {
                episode: result.task_id.clone(),
                field,
                recorded,
                recounted,
            });
        }
    }
    if let Some(bad) = records.iter().find(|r| r.episode_id != result.task_id) {
        return Err(IntegrityError {
            episode: result.task_id.clone(),
            field: "episode_id",
            recorded: 0,
            recounted: bad.call_index,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{Policy, Termination};

    fn result(success: bool, steps: usize, mods: usize) -> EpisodeResult {
        EpisodeResult {
            task_id: "t".into(),
            method: Policy::Rebact,
            success,
            score: if success { 100 } else { 0 },
            steps,
            llm_calls: steps,
            modifications: mods,
            retries: 0,
            termination: if success {
                Termination::Success
            } else {
                Termination::BudgetExhausted
            },
        }
    }

    #[test]
    fn success_rate_61_of_100() {
        let results: Vec<_> = (0..100).map(|i| result(i < 61, 5, 0)).collect();
        let s = aggregate(&results, "rebact").unwrap();
        assert_eq!(s.success_rate, 61.0);
        assert_eq!(s.avg_score, 61.0);
    }

    #[test]
    fn proportion_is_pooled() {
        assert_eq!(
            aggregate(&[result(true, 10, 2)], "m")
                .unwrap()
                .modification_proportion,
            0.2
        );
        let s = aggregate(&[result(true, 10, 1), result(true, 30, 5)], "m").unwrap();
        assert_eq!(s.modification_proportion, 6.0 / 40.0);
    }

    #[test]
    fn empty_and_mixed_inputs_are_rejected() {
        assert!(matches!(aggregate(&[], "m"), Err(MetricsError::EmptyInput)));
        let mut other = result(true, 1, 0);
        other.method = Policy::React;
        assert!(matches!(
            aggregate(&[result(true, 1, 0), other], "m"),
            Err(MetricsError::MixedMethods(..))
        ));
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round2(2.0 / 3.0), "0.67");
        assert_eq!(round2(0.125), "0.13");
        assert_eq!(round2(1.005), "1.01");
        assert_eq!(round2(76.18), "76.18");
        assert_eq!(round2(0.0), "0.00");
    }

    #[test]
    fn single_summary_renders_header_and_row() {
        let s = aggregate(&[result(true, 3, 1)], "rebact").unwrap();
        let r = render_summary(&[s]);
        assert_eq!(r.table.lines().count(), 2);
        assert_eq!(
            r.csv,
            "method,n_tasks,success_rate,avg_score,avg_llm_calls,modification_proportion,avg_retries\nrebact,1,100.00,100.00,3.00,0.33,0.00\n"
        );
        assert!(r.table.lines().nth(1).unwrap().starts_with("rebact"));
    }

    #[test]
    fn log_reading_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.jsonl");
        std::fs::write(&empty, "").unwrap();
        assert!(read_trajectory_log(&empty).unwrap().is_empty());

        let rec = CallRecord {
            episode_id: "t".into(),
            step: 0,
            call_index: 0,
            prompt_sha256: "00".into(),
            response: "r".into(),
            parsed: None,
            parse_error: Some("e".into()),
            exec: None,
            observation: None,
            duration_ms: 0,
        };
        let line = serde_json::to_string(&rec).unwrap();
        let truncated = dir.path().join("bad.jsonl");
        std::fs::write(
            &truncated,
            format!("{line}\n{line}\n{}", &line[..line.len() / 2]),
        )
        .unwrap();
        match read_trajectory_log(&truncated) {
            Err(MetricsError::CorruptLog { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
