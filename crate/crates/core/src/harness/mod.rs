//! Episode runner, suite aggregation and the seed-robustness experiment.

mod episode;
mod robustness;
mod stats;
mod suite;

pub use episode::{run_episode, run_instance, EpisodeResult, TerminalReason, TrajectoryStep};
pub use robustness::{mode_seeds, robustness_experiment, run_mode, ModeResult, RobustnessReport, SeedMode};
pub use stats::{two_proportion_test, wilson_interval, ConfidenceInterval, ProportionTest, DEFAULT_Z};
pub use suite::{run_suite, RateSummary, SuiteReport, TaskSummary, Timing, DEFAULT_SEED};
