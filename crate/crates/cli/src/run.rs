use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rebact_core::agent::{AgentError, JsonlLog};
use rebact_core::backend::{BackendConfig, BackendFactory};
use rebact_core::env::load_tasks;
use rebact_core::metrics::{
    aggregate, check_consistency, read_trajectory_log, render_summary, Rendered, Summary,
};
use rebact_core::{
    run_episode, AgentConfig, CraftTask, EpisodeResult, FormatId, Policy, PromptTemplate,
};
use serde::Deserialize;

use crate::{CliError, LOG_DIR, RESULTS_FILE, SUMMARY_CSV, SUMMARY_TXT};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub policy: Policy,
    pub backend: BackendConfig,
    pub tasks: Vec<PathBuf>,
    pub budget: usize,
    pub window: usize,
    pub seed: u64,
    /// Episodes run concurrently.
    pub jobs: usize,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(backend: BackendConfig, tasks: Vec<PathBuf>, out: PathBuf) -> Self {
        Self {
            policy: Policy::Rebact,
            backend,
            tasks,
            budget: rebact_core::agent::DEFAULT_BUDGET,
            window: 1,
            seed: 0,
            jobs: 1,
            out,
        }
    }
}

/// Run settings as stored in a config file; every field is optional and
/// command-line flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub agent: Option<Policy>,
    pub backend: Option<BackendSpec>,
    pub tasks: Option<OneOrMany>,
    pub budget: Option<usize>,
    pub window: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BackendSpec {
    Short(String),
    Full(Box<BackendConfig>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(PathBuf),
    Many(Vec<PathBuf>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<PathBuf> {
        match self {
            OneOrMany::One(p) => vec![p],
            OneOrMany::Many(v) => v,
        }
    }
}

impl RunFile {
    /// Reads a run config file. Relative paths inside it are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut file: RunFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid run config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };
        if let Some(tasks) = file.tasks.take() {
            file.tasks = Some(OneOrMany::Many(
                tasks.into_vec().into_iter().map(rebase).collect(),
            ));
        }
        file.out = file.out.map(rebase);
        if let Some(BackendSpec::Full(cfg)) = &mut file.backend {
            cfg.script_path = cfg.script_path.take().map(rebase);
        }
        Ok(file)
    }
}

impl BackendSpec {
    pub fn resolve(self) -> Result<BackendConfig, CliError> {
        match self {
            BackendSpec::Short(s) => {
                BackendConfig::from_spec(&s).map_err(|e| CliError::Config(e.to_string()))
            }
            BackendSpec::Full(cfg) => {
                cfg.validate()
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok(*cfg)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub results: Vec<EpisodeResult>,
    pub summary: Summary,
    pub rendered: Rendered,
}

/// File name for an episode's call log. Characters outside
/// `[A-Za-z0-9._-]` are replaced so any task id maps to a plain file name.
pub fn episode_file_name(task_id: &str) -> String {
    let safe: String = task_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.jsonl")
}

/// Loads and concatenates task files, rejecting ids that repeat across
/// files or collide as log file names.
pub fn load_task_set(paths: &[PathBuf]) -> Result<Vec<Arc<CraftTask>>, CliError> {
    if paths.is_empty() {
        return Err(CliError::Config("no task file given".into()));
    }
    let mut tasks = Vec::new();
    let mut files = BTreeSet::new();
    for path in paths {
        let loaded =
            load_tasks(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for task in loaded {
            if !files.insert(episode_file_name(task.id())) {
                return Err(CliError::Config(format!("duplicate task id {}", task.id())));
            }
            tasks.push(Arc::new(task));
        }
    }
    if tasks.is_empty() {
        return Err(CliError::Config("task files contain no tasks".into()));
    }
    Ok(tasks)
}

fn agent_config(cfg: &RunConfig) -> Result<AgentConfig, CliError> {
    if cfg.budget == 0 {
        return Err(CliError::Config("budget must be at least 1".into()));
    }
    let mut agent = AgentConfig::new(cfg.policy);
    agent.budget = cfg.budget;
    agent.template = PromptTemplate::default_for(FormatId::Textcraft)
        .with_window(cfg.window)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(agent)
}

fn run_one(
    agent: &AgentConfig,
    factory: &BackendFactory,
    task: &Arc<CraftTask>,
    log_dir: &Path,
) -> Result<EpisodeResult, CliError> {
    let path = log_dir.join(episode_file_name(task.id()));
    let file = File::create(&path).map_err(CliError::io(&path))?;
    let mut log = JsonlLog::new(BufWriter::new(file));
    let mut backend = factory.for_task(Arc::clone(task));
    match run_episode(agent, Arc::clone(task), &mut backend, &mut log) {
        Ok(ep) => Ok(ep.result),
        Err(AgentError::Backend { source, partial }) => {
            tracing::warn!(task = task.id(), error = %source, "episode ended by backend failure");
            Ok(partial.result)
        }
        Err(AgentError::Log(e)) => Err(CliError::Io { path, source: e }),
    }
}

/// Runs every task, writes logs, results and summaries under `cfg.out`,
/// then verifies each result against its log.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let agent = agent_config(cfg)?;
    let tasks = load_task_set(&cfg.tasks)?;
    let factory = BackendFactory::new(cfg.backend.clone(), cfg.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let log_dir = cfg.out.join(LOG_DIR);
    fs::create_dir_all(&log_dir).map_err(CliError::io(&log_dir))?;

    let slots: Mutex<Vec<Option<Result<EpisodeResult, CliError>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let jobs = cfg.jobs.clamp(1, tasks.len());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(i) else { break };
                let outcome = run_one(&agent, &factory, task, &log_dir);
                slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(outcome);
            });
        }
    });
    let results = slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every task index is claimed exactly once"))
        .collect::<Result<Vec<_>, _>>()?;

    let results_path = cfg.out.join(RESULTS_FILE);
    let mut text = String::new();
    for r in &results {
        text.push_str(&serde_json::to_string(r).expect("results serialize"));
        text.push('\n');
    }
    fs::write(&results_path, text).map_err(CliError::io(&results_path))?;

    verify(&results, &log_dir)?;
    let summary =
        aggregate(&results, cfg.policy.as_str()).map_err(|e| CliError::Integrity(e.to_string()))?;
    let rendered = render_summary(std::slice::from_ref(&summary));
    write_summaries(&cfg.out, &rendered)?;
    Ok(RunOutcome {
        results,
        summary,
        rendered,
    })
}

pub(crate) fn verify(results: &[EpisodeResult], log_dir: &Path) -> Result<(), CliError> {
    for r in results {
        let path = log_dir.join(episode_file_name(&r.task_id));
        if !path.is_file() {
            return Err(CliError::Integrity(format!(
                "episode {}: log {} is missing",
                r.task_id,
                path.display()
            )));
        }
        let records = read_trajectory_log(&path).map_err(|e| CliError::Integrity(e.to_string()))?;
        check_consistency(r, &records).map_err(|e| CliError::Integrity(e.to_string()))?;
        if r.llm_calls != r.steps + r.retries {
            return Err(CliError::Integrity(format!(
                "episode {}: llm_calls {} != steps {} + retries {}",
                r.task_id, r.llm_calls, r.steps, r.retries
            )));
        }
    }
    Ok(())
}

pub(crate) fn write_summaries(out: &Path, rendered: &Rendered) -> Result<(), CliError> {
    let txt = out.join(SUMMARY_TXT);
    fs::write(&txt, &rendered.table).map_err(CliError::io(&txt))?;
    let csv = out.join(SUMMARY_CSV);
    fs::write(&csv, &rendered.csv).map_err(CliError::io(&csv))
}
