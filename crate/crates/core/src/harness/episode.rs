use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::Agent;
use crate::error::TaskError;
use crate::screens::{AgentAction, GoalStatus, TransitionResult};
use crate::session::Session;
use crate::tasks::{self, TaskDefinition, TaskInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    AgentStatusComplete,
    AgentStatusInfeasible,
    BudgetExhausted,
    /// The episode could not be run; see `error`.
    InternalError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub observation_digest: String,
    pub action: AgentAction,
    pub result: TransitionResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_name: String,
    pub seed: u64,
    pub goal: String,
    pub steps_taken: usize,
    pub max_steps: usize,
    pub reward: f64,
    pub success: bool,
    pub terminal_reason: TerminalReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub trajectory: Vec<TrajectoryStep>,
}

impl EpisodeResult {
    pub fn quarantined(task_name: &str, seed: u64, error: impl Into<String>) -> Self {
        EpisodeResult {
            task_name: task_name.to_string(),
            seed,
            goal: String::new(),
            steps_taken: 0,
            max_steps: 0,
            reward: 0.0,
            success: false,
            terminal_reason: TerminalReason::InternalError,
            answer: None,
            error: Some(error.into()),
            trajectory: Vec::new(),
        }
    }

    /// Hex SHA-256 over the serialized trajectory.
    pub fn trajectory_digest(&self) -> String {
        let json = serde_json::to_string(&self.trajectory).expect("trajectory serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Runs one already-instantiated task in `session`.
pub fn run_instance(
    instance: &TaskInstance,
    agent: &mut dyn Agent,
    session: &mut Session,
) -> Result<EpisodeResult, TaskError> {
    session.reset();
    tasks::initialize_task(instance, session)?;
    agent.begin(instance);
    let mut trajectory = Vec::new();
    let mut terminal = TerminalReason::BudgetExhausted;
    for step_index in 0..instance.max_steps {
        let before = session.observe();
        let mut step = agent.step(&before, step_index);
        if step.action.validate().is_err() {
            step.reason = format!("malformed action {}: {}", step.action.to_json(), step.reason);
            step.action = AgentAction::unknown();
        }
        let result = session
            .dispatch(&step.action)
            .map_err(|e| TaskError::Init(format!("dispatch on a closed session: {e}")))?;
        trajectory.push(TrajectoryStep {
            observation_digest: before.digest(),
            action: step.action.clone(),
            result: result.clone(),
        });
        let after = (!session.is_closed()).then(|| session.observe());
        agent.after_step(&before, after.as_ref(), &step, &result);
        if session.is_closed() {
            terminal = match session.status() {
                Some(GoalStatus::Infeasible) => TerminalReason::AgentStatusInfeasible,
                _ => TerminalReason::AgentStatusComplete,
            };
            break;
        }
    }
    let reward = tasks::is_successful(instance, session);
    let answer = session.answer().map(str::to_string);
    tasks::teardown(instance, session);
    Ok(EpisodeResult {
        task_name: instance.name().to_string(),
        seed: instance.seed,
        goal: instance.goal.clone(),
        steps_taken: trajectory.len(),
        max_steps: instance.max_steps,
        reward,
        success: reward == 1.0,
        terminal_reason: terminal,
        answer,
        error: None,
        trajectory,
    })
}

/// Instantiates `definition` with `seed` and runs it in a fresh session.
pub fn run_episode(definition: &TaskDefinition, agent: &mut dyn Agent, seed: u64) -> Result<EpisodeResult, TaskError> {
    let instance = tasks::instantiate(definition, seed)?;
    let mut session = Session::new();
    run_instance(&instance, agent, &mut session)
}
