use crate::device::{pristine, DeviceState};
use crate::error::SessionError;
use crate::screens::{self, ActionType, AgentAction, GoalStatus, Observation, TransitionResult, UiState};

/// One simulated device plus its UI navigation state. A session ends when
/// the agent reports a status other than `in_progress`.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub device: DeviceState,
    pub ui: UiState,
    answer: Option<String>,
    status: Option<GoalStatus>,
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

impl Session {
    pub fn new() -> Self {
        Session {
            device: pristine().restore(),
            ui: UiState::default(),
            answer: None,
            status: None,
        }
    }

    /// Back to the pristine device with the launcher in front.
    pub fn reset(&mut self) {
        *self = Session::new();
    }

    pub fn teardown(&mut self) {
        self.reset();
    }

    pub fn is_closed(&self) -> bool {
        self.status.is_some()
    }

    pub fn status(&self) -> Option<GoalStatus> {
        self.status
    }

    /// Last text submitted with an `answer` action.
    pub fn answer(&self) -> Option<&str> {
        self.answer.as_deref()
    }

    /// Current screen. Rendering is synchronous, so `wait_to_stabilize` has
    /// nothing to wait for.
    pub fn get_state(&self, _wait_to_stabilize: bool) -> Result<Observation, SessionError> {
        if self.is_closed() {
            return Err(SessionError::Closed);
        }
        Ok(self.observe())
    }

    /// Renders without the closed check, for evaluation after the episode.
    pub fn observe(&self) -> Observation {
        screens::render(&self.device, &self.ui)
    }

    /// Observations at every vertical scroll position of the current screen.
    pub fn scroll_sweep(&self) -> Vec<Observation> {
        screens::scroll_sweep(&self.device, &self.ui)
    }

    pub fn dispatch(&mut self, action: &AgentAction) -> Result<TransitionResult, SessionError> {
        if self.is_closed() {
            return Err(SessionError::Closed);
        }
        match action.action_type {
            ActionType::Status => {
                if let Err(e) = action.validate() {
                    return Ok(TransitionResult::rejected(e.to_string()));
                }
                match action.goal_status {
                    Some(GoalStatus::InProgress) | None => Ok(TransitionResult::applied("still in progress")),
                    Some(status) => {
                        self.status = Some(status);
                        Ok(TransitionResult {
                            applied: true,
                            note: format!(
                                "episode ended: {}",
                                if status == GoalStatus::Complete {
                                    "complete"
                                } else {
                                    "infeasible"
                                }
                            ),
                            terminal: true,
                        })
                    }
                }
            }
            ActionType::Answer => {
                if let Err(e) = action.validate() {
                    return Ok(TransitionResult::rejected(e.to_string()));
                }
                self.answer = action.text.clone();
                Ok(TransitionResult::applied("answer recorded"))
            }
            _ => Ok(screens::dispatch(&mut self.device, &mut self.ui, action)),
        }
    }
}
