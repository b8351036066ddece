//! Fixed-seed versus varied-seed comparison for a single task.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::episode::EpisodeResult;
use super::stats::{two_proportion_test, wilson_interval, ConfidenceInterval, ProportionTest, DEFAULT_Z};
use super::suite::run_suite;
use crate::agents::AgentFactory;
use crate::error::StatsError;
use crate::tasks::TaskDefinition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    FixedSeed,
    VariedSeed,
}

impl fmt::Display for SeedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedMode::FixedSeed => "fixed_seed",
            SeedMode::VariedSeed => "varied_seed",
        })
    }
}

impl FromStr for SeedMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().replace('-', "_").as_str() {
            "fixed_seed" | "fixed" => Ok(SeedMode::FixedSeed),
            "varied_seed" | "varied" => Ok(SeedMode::VariedSeed),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

/// Seeds used by `mode`: `base` repeated, or `base..base + n`.
pub fn mode_seeds(mode: SeedMode, base: u64, n: usize) -> Vec<u64> {
    match mode {
        SeedMode::FixedSeed => vec![base; n],
        SeedMode::VariedSeed => (0..n as u64).map(|i| base + i).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: SeedMode,
    pub seeds: Vec<u64>,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci: ConfidenceInterval,
    pub trajectory_digests: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub task_name: String,
    pub agent: String,
    pub trials: usize,
    pub fixed: ModeResult,
    pub varied: ModeResult,
    pub test: ProportionTest,
}

fn summarize(mode: SeedMode, seeds: Vec<u64>, episodes: &[EpisodeResult]) -> Result<ModeResult, StatsError> {
    let n = episodes.len() as u64;
    let s = episodes.iter().filter(|e| e.success).count() as u64;
    Ok(ModeResult {
        mode,
        seeds,
        trials: n,
        successes: s,
        success_rate: if n == 0 { 0.0 } else { s as f64 / n as f64 },
        ci: wilson_interval(s, n, DEFAULT_Z)?,
        trajectory_digests: episodes.iter().map(|e| e.trajectory_digest()).collect(),
    })
}

/// Runs `trials` episodes in one mode.
pub fn run_mode(
    task: &TaskDefinition,
    factory: &AgentFactory,
    agent_name: &str,
    trials: usize,
    mode: SeedMode,
    base_seed: u64,
    parallel: usize,
) -> Result<ModeResult, StatsError> {
    let seeds = mode_seeds(mode, base_seed, trials);
    let report = run_suite(std::slice::from_ref(task), factory, agent_name, &seeds, parallel);
    summarize(mode, seeds, &report.episodes)
}

/// Runs both modes and compares them.
pub fn robustness_experiment(
    task: &TaskDefinition,
    factory: &AgentFactory,
    agent_name: &str,
    trials: usize,
    base_seed: u64,
    parallel: usize,
) -> Result<RobustnessReport, StatsError> {
    if trials < 2 {
        return Err(StatsError::NoTrials);
    }
    let fixed = run_mode(
        task,
        factory,
        agent_name,
        trials,
        SeedMode::FixedSeed,
        base_seed,
        parallel,
    )?;
    let varied = run_mode(
        task,
        factory,
        agent_name,
        trials,
        SeedMode::VariedSeed,
        base_seed,
        parallel,
    )?;
    let test = two_proportion_test(fixed.successes, fixed.trials, varied.successes, varied.trials)?;
    Ok(RobustnessReport {
        task_name: task.name.clone(),
        agent: agent_name.to_string(),
        trials,
        fixed,
        varied,
        test,
    })
}

impl RobustnessReport {
    pub fn render(&self) -> String {
        let line = |m: &ModeResult| {
            format!(
                "  {:<12} SR {:>5.1}% ({}/{})  95% CI [{:.3}, {:.3}]\n",
                m.mode.to_string(),
                m.success_rate * 100.0,
                m.successes,
                m.trials,
                m.ci.low,
                m.ci.high
            )
        };
        format!(
            "{} / {} ({} trials)\n{}{}  {}: z = {:.3}, p = {:.4}\n",
            self.task_name,
            self.agent,
            self.trials,
            line(&self.fixed),
            line(&self.varied),
            self.test.test,
            self.test.z_statistic,
            self.test.p_value
        )
    }
}
