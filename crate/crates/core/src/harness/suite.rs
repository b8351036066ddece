use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EpisodeResult};
use super::stats::{wilson_interval, ConfidenceInterval, DEFAULT_Z};
use crate::agents::AgentFactory;
use crate::tasks::TaskDefinition;

pub const DEFAULT_SEED: u64 = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub episodes: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub mean_reward: f64,
    /// Absent when there are no episodes.
    pub ci: Option<ConfidenceInterval>,
}

impl RateSummary {
    pub fn of<'a>(episodes: impl IntoIterator<Item = &'a EpisodeResult>) -> Self {
        let (mut n, mut s, mut total) = (0u64, 0u64, 0.0);
        for e in episodes {
            n += 1;
            s += e.success as u64;
            total += e.reward;
        }
        let rate = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
        RateSummary {
            episodes: n,
            successes: s,
            success_rate: rate(s as f64),
            mean_reward: rate(total),
            ci: wilson_interval(s, n, DEFAULT_Z).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub task_name: String,
    #[serde(flatten)]
    pub rate: RateSummary,
}

/// Volatile fields, kept apart so the rest of a report can be compared
/// byte for byte between runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_at: String,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub agent: String,
    pub seeds: Vec<u64>,
    pub tasks: Vec<TaskSummary>,
    pub overall: RateSummary,
    pub episodes: Vec<EpisodeResult>,
    pub timing: Timing,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without `timing`, as compact JSON.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        serde_json::to_string(&v).expect("report serializes")
    }

    /// Plain-text table: one row per task, then the overall rate.
    pub fn render_table(&self) -> String {
        let width = self.tasks.iter().map(|t| t.task_name.len()).max().unwrap_or(4).max(7);
        let mut out = format!("agent: {}  seeds: {}\n", self.agent, self.seeds.len());
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>7}  {:>17}",
            "Task", "Episodes", "SR", "95% CI"
        );
        let row = |out: &mut String, name: &str, r: &RateSummary| {
            let ci =
                r.ci.map(|c| format!("[{:.3}, {:.3}]", c.low, c.high))
                    .unwrap_or_else(|| "n/a".into());
            let _ = writeln!(
                out,
                "{name:<width$}  {:>8}  {:>6.1}%  {ci:>17}",
                r.episodes,
                r.success_rate * 100.0
            );
        };
        for t in &self.tasks {
            row(&mut out, &t.task_name, &t.rate);
        }
        row(&mut out, "Overall", &self.overall);
        out
    }
}

fn run_guarded(def: &TaskDefinition, factory: &AgentFactory, seed: u64) -> EpisodeResult {
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let mut agent = factory();
        run_episode(def, agent.as_mut(), seed)
    }));
    match outcome {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => EpisodeResult::quarantined(&def.name, seed, e.to_string()),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            EpisodeResult::quarantined(&def.name, seed, format!("panic: {msg}"))
        }
    }
}

/// Runs every task with every seed. Results are ordered by task, then
/// seed, whatever order the episodes finish in. `parallel` of 0 or 1 runs
/// on the calling thread.
pub fn run_suite(
    tasks: &[TaskDefinition],
    factory: &AgentFactory,
    agent_name: &str,
    seeds: &[u64],
    parallel: usize,
) -> SuiteReport {
    let started_at = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    let jobs: Vec<(&TaskDefinition, u64)> = tasks.iter().flat_map(|t| seeds.iter().map(move |s| (t, *s))).collect();
    let episodes: Vec<EpisodeResult> = if parallel <= 1 {
        jobs.iter().map(|(t, s)| run_guarded(t, factory, *s)).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(parallel).build() {
            Ok(pool) => pool.install(|| jobs.par_iter().map(|(t, s)| run_guarded(t, factory, *s)).collect()),
            Err(_) => jobs.iter().map(|(t, s)| run_guarded(t, factory, *s)).collect(),
        }
    };
    let summaries = tasks
        .iter()
        .map(|t| TaskSummary {
            task_name: t.name.clone(),
            rate: RateSummary::of(episodes.iter().filter(|e| e.task_name == t.name)),
        })
        .collect();
    SuiteReport {
        agent: agent_name.to_string(),
        seeds: seeds.to_vec(),
        tasks: summaries,
        overall: RateSummary::of(&episodes),
        episodes,
        timing: Timing {
            started_at,
            wall_time_ms: clock.elapsed().as_millis() as u64,
        },
    }
}
