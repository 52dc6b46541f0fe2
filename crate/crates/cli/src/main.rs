use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rebact_cli::{
    cmd_report, cmd_run, cmd_serve, load_task_set, CliError, RunConfig, RunFile, Transport,
};
use rebact_core::backend::BackendConfig;
use rebact_core::env::{generate_tasks, tasks_to_json, GenerateOptions, RecipeUniverse};
use rebact_core::Policy;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "rebact", version, about = "Reflect-before-act agent harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an agent over a task file and write logs, results and a summary.
    Run(RunArgs),
    /// Re-aggregate a run directory after checking results against logs.
    Report {
        #[arg(default_value = "runs/latest")]
        dir: PathBuf,
    },
    /// Serve the crafting environment over a line protocol.
    Serve(ServeArgs),
    /// Generate crafting tasks of a given depth as JSON.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run config file (JSON); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_policy)]
    agent: Option<Policy>,
    /// planner, faulty, faulty:<p>, or a backend config file.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    tasks: Vec<PathBuf>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, conflicts_with = "port")]
    stdio: bool,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    tasks: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of unrelated recipes added to each task's recipe list.
    #[arg(long, default_value_t = 0)]
    distractors: usize,
    /// Use the small hand-written universe instead of the synthetic one.
    #[arg(long)]
    sample: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse()
}

fn run_config(args: RunArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => RunFile::load(path)?,
        None => RunFile::default(),
    };
    let backend = match (args.backend, file.backend) {
        (Some(spec), _) => {
            BackendConfig::from_spec(&spec).map_err(|e| CliError::Config(e.to_string()))?
        }
        (None, Some(spec)) => spec.resolve()?,
        (None, None) => BackendConfig::from_spec("planner").expect("builtin spec"),
    };
    let tasks = if args.tasks.is_empty() {
        file.tasks.map(|t| t.into_vec()).unwrap_or_default()
    } else {
        args.tasks
    };
    let out = args
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("runs/latest"));
    let mut cfg = RunConfig::new(backend, tasks, out);
    cfg.policy = args.agent.or(file.agent).unwrap_or(cfg.policy);
    cfg.budget = args.budget.or(file.budget).unwrap_or(cfg.budget);
    cfg.window = args.window.or(file.window).unwrap_or(cfg.window);
    cfg.seed = args.seed.or(file.seed).unwrap_or(cfg.seed);
    cfg.jobs = args.jobs.or(file.jobs).unwrap_or(cfg.jobs);
    Ok(cfg)
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let universe = if args.sample {
        RecipeUniverse::sample()
    } else {
        RecipeUniverse::synthetic(args.seed)
    };
    let options = GenerateOptions {
        distractors: args.distractors,
        ..GenerateOptions::default()
    };
    let tasks = generate_tasks(&universe, args.depth, args.count, args.seed, &options)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let json = tasks_to_json(&tasks);
    match args.out {
        Some(path) => std::fs::write(&path, json).map_err(|source| CliError::Io { path, source }),
        None => {
            emit(&format!("{json}\n"));
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let outcome = cmd_run(&run_config(args)?)?;
            emit(&outcome.rendered.table);
        }
        Command::Report { dir } => emit(&cmd_report(&dir)?.table),
        Command::Serve(args) => {
            let transport = match (args.stdio, args.port) {
                (_, Some(port)) => Transport::Tcp(port),
                _ => Transport::Stdio,
            };
            let tasks = load_task_set(std::slice::from_ref(&args.tasks))?;
            cmd_serve(transport, tasks).map_err(|source| CliError::Io {
                path: args.tasks,
                source,
            })?;
        }
        Command::Generate(args) => generate(args)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
