use std::io::Write as _;
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use glob::Pattern;
use phonesim::agents::{factory, AgentKind, ModelBackend, ScriptedBackend};
use phonesim::harness::{robustness_experiment, run_mode, run_suite, SeedMode, TerminalReason, DEFAULT_SEED};
use phonesim::tasks::{cached_registry, TaskDefinition};
use phonesim::wire::{serve_stdio, serve_tcp, AnnotationStore, ServerConfig};

/// Like `print!`/`println!`, but a closed stdout (e.g. piped into `head`)
/// is not an error.
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "phonesim",
    version,
    about = "Simulated phone benchmark for UI-control agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    FixedSeed,
    VariedSeed,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite: every matching task with every seed.
    Run {
        /// Glob over task names.
        #[arg(long, default_value = "*")]
        tasks: String,
        #[arg(long, default_value = "oracle")]
        agent: AgentKind,
        /// First seed; trials use seed, seed+1, ...
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Backend transcript for the prompting agents.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Compare a fixed seed against varied seeds for one task.
    Robustness {
        #[arg(long)]
        task: String,
        #[arg(long, default_value = "planted")]
        agent: AgentKind,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Serve the line protocol on a TCP address, or on stdin/stdout with `stdio`.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        /// Append annotations to this JSON-lines file.
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Print the task catalog as JSON.
    Catalog,
}

/// Error that maps to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn select_tasks(glob: &str) -> Result<Vec<TaskDefinition>> {
    let pattern = Pattern::new(glob).map_err(|e| UsageError(format!("bad task glob {glob:?}: {e}")))?;
    let tasks: Vec<TaskDefinition> = cached_registry()
        .iter()
        .filter(|t| pattern.matches(&t.name))
        .cloned()
        .collect();
    if tasks.is_empty() {
        return Err(UsageError(format!("no task matches {glob:?}")).into());
    }
    Ok(tasks)
}

fn backend(kind: AgentKind, transcript: Option<&PathBuf>) -> Result<Option<Arc<dyn ModelBackend>>> {
    let Some(path) = transcript else { return Ok(None) };
    if !kind.needs_backend() {
        bail!(UsageError(format!("agent {kind} does not take a transcript")));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let b = ScriptedBackend::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some(Arc::new(b)))
}

fn write_report(path: Option<&PathBuf>, json: &str) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            tasks,
            agent,
            seed,
            trials,
            parallel,
            report,
            transcript,
        } => {
            if trials == 0 {
                bail!(UsageError("--trials must be at least 1".into()));
            }
            let tasks = select_tasks(&tasks)?;
            let f = factory(agent, backend(agent, transcript.as_ref())?);
            let seeds: Vec<u64> = (0..trials).map(|i| seed + i).collect();
            let rep = run_suite(&tasks, &f, agent.as_str(), &seeds, parallel);
            out!("{}", rep.render_table());
            write_report(report.as_ref(), &rep.to_json())?;
            let internal: Vec<_> = rep
                .episodes
                .iter()
                .filter(|e| e.terminal_reason == TerminalReason::InternalError)
                .collect();
            for e in &internal {
                eprintln!(
                    "internal error in {} seed {}: {}",
                    e.task_name,
                    e.seed,
                    e.error.as_deref().unwrap_or("")
                );
            }
            Ok(internal.is_empty())
        }
        Command::Robustness {
            task,
            agent,
            trials,
            mode,
            seed,
            parallel,
            report,
            transcript,
        } => {
            let def = cached_registry()
                .iter()
                .find(|t| t.name == task)
                .ok_or_else(|| UsageError(format!("unknown task {task}")))?;
            let f = factory(agent, backend(agent, transcript.as_ref())?);
            let json = match mode {
                Mode::Both => {
                    let rep = robustness_experiment(def, &f, agent.as_str(), trials, seed, parallel)
                        .map_err(|e| UsageError(e.to_string()))?;
                    out!("{}", rep.render());
                    serde_json::to_string_pretty(&rep)?
                }
                Mode::FixedSeed | Mode::VariedSeed => {
                    let m = if matches!(mode, Mode::FixedSeed) {
                        SeedMode::FixedSeed
                    } else {
                        SeedMode::VariedSeed
                    };
                    let r = run_mode(def, &f, agent.as_str(), trials, m, seed, parallel)
                        .map_err(|e| UsageError(e.to_string()))?;
                    outln!(
                        "{} / {} {}: SR {:.1}% ({}/{})  95% CI [{:.3}, {:.3}]",
                        def.name,
                        agent,
                        r.mode,
                        r.success_rate * 100.0,
                        r.successes,
                        r.trials,
                        r.ci.low,
                        r.ci.high
                    );
                    serde_json::to_string_pretty(&r)?
                }
            };
            write_report(report.as_ref(), &json)?;
            Ok(true)
        }
        Command::Serve { listen, annotations } => {
            let config = ServerConfig {
                store: Arc::new(match annotations {
                    Some(p) => AnnotationStore::with_file(p),
                    None => AnnotationStore::in_memory(),
                }),
                ..ServerConfig::default()
            };
            if listen == "stdio" {
                serve_stdio(&config)?;
            } else {
                let listener = TcpListener::bind(&listen).with_context(|| format!("binding {listen}"))?;
                outln!("listening on {}", listener.local_addr()?);
                let _ = std::io::stdout().flush();
                serve_tcp(listener, config)?;
            }
            Ok(true)
        }
        Command::Catalog => {
            let entries: Vec<_> = cached_registry().iter().map(|t| t.catalog_entry()).collect();
            outln!("{}", serde_json::to_string_pretty(&entries)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
