use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionType {
    Click,
    Scroll,
    InputText,
    NavigateHome,
    NavigateBack,
    KeyboardEnter,
    OpenApp,
    LongPress,
    Status,
    Wait,
    Answer,
    Unknown,
}

impl ActionType {
    pub const ALL: [ActionType; 12] = [
        ActionType::Click,
        ActionType::Scroll,
        ActionType::InputText,
        ActionType::NavigateHome,
        ActionType::NavigateBack,
        ActionType::KeyboardEnter,
        ActionType::OpenApp,
        ActionType::LongPress,
        ActionType::Status,
        ActionType::Wait,
        ActionType::Answer,
        ActionType::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionType::Click => "click",
            ActionType::Scroll => "scroll",
            ActionType::InputText => "input_text",
            ActionType::NavigateHome => "navigate_home",
            ActionType::NavigateBack => "navigate_back",
            ActionType::KeyboardEnter => "keyboard_enter",
            ActionType::OpenApp => "open_app",
            ActionType::LongPress => "long_press",
            ActionType::Status => "status",
            ActionType::Wait => "wait",
            ActionType::Answer => "answer",
            ActionType::Unknown => "unknown",
        }
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    pub fn parse(text: &str) -> Option<Direction> {
        match text.trim().to_ascii_lowercase().as_str() {
            "up" => Some(Direction::Up),
            "down" => Some(Direction::Down),
            "left" => Some(Direction::Left),
            "right" => Some(Direction::Right),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalStatus {
    InProgress,
    Complete,
    Infeasible,
}

/// A parsed agent action. Only the fields its `action_type` needs are set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentAction {
    pub action_type: ActionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_status: Option<GoalStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {action_type} action: {message}")]
pub struct ActionError {
    pub action_type: ActionType,
    pub message: String,
}

impl AgentAction {
    fn bare(action_type: ActionType) -> Self {
        AgentAction {
            action_type,
            index: None,
            x: None,
            y: None,
            text: None,
            direction: None,
            goal_status: None,
            app_name: None,
        }
    }

    pub fn click(index: usize) -> Self {
        AgentAction {
            index: Some(index),
            ..Self::bare(ActionType::Click)
        }
    }

    pub fn click_at(x: i64, y: i64) -> Self {
        AgentAction {
            x: Some(x),
            y: Some(y),
            ..Self::bare(ActionType::Click)
        }
    }

    pub fn long_press(index: usize) -> Self {
        AgentAction {
            index: Some(index),
            ..Self::bare(ActionType::LongPress)
        }
    }

    pub fn input_text(text: impl Into<String>) -> Self {
        AgentAction {
            text: Some(text.into()),
            ..Self::bare(ActionType::InputText)
        }
    }

    pub fn scroll(direction: Direction) -> Self {
        AgentAction {
            direction: Some(direction),
            ..Self::bare(ActionType::Scroll)
        }
    }

    pub fn open_app(name: impl Into<String>) -> Self {
        AgentAction {
            app_name: Some(name.into()),
            ..Self::bare(ActionType::OpenApp)
        }
    }

    pub fn status(status: GoalStatus) -> Self {
        AgentAction {
            goal_status: Some(status),
            ..Self::bare(ActionType::Status)
        }
    }

    pub fn complete() -> Self {
        Self::status(GoalStatus::Complete)
    }

    pub fn answer(text: impl Into<String>) -> Self {
        AgentAction {
            text: Some(text.into()),
            ..Self::bare(ActionType::Answer)
        }
    }

    pub fn navigate_home() -> Self {
        Self::bare(ActionType::NavigateHome)
    }

    pub fn navigate_back() -> Self {
        Self::bare(ActionType::NavigateBack)
    }

    pub fn keyboard_enter() -> Self {
        Self::bare(ActionType::KeyboardEnter)
    }

    pub fn wait() -> Self {
        Self::bare(ActionType::Wait)
    }

    pub fn unknown() -> Self {
        Self::bare(ActionType::Unknown)
    }

    /// Checks that exactly the fields required by the action type are present.
    pub fn validate(&self) -> Result<(), ActionError> {
        let fail = |message: &str| {
            Err(ActionError {
                action_type: self.action_type,
                message: message.to_string(),
            })
        };
        let has_index = self.index.is_some();
        let has_xy = self.x.is_some() || self.y.is_some();
        let present = [
            ("index", has_index),
            ("x", self.x.is_some()),
            ("y", self.y.is_some()),
            ("text", self.text.is_some()),
            ("direction", self.direction.is_some()),
            ("goal_status", self.goal_status.is_some()),
            ("app_name", self.app_name.is_some()),
        ];
        let allowed: &[&str] = match self.action_type {
            ActionType::Click | ActionType::LongPress => {
                if has_index == has_xy {
                    return fail("needs either index or both x and y");
                }
                if has_xy && (self.x.is_none() || self.y.is_none()) {
                    return fail("needs both x and y");
                }
                &["index", "x", "y"]
            }
            ActionType::InputText | ActionType::Answer => {
                if self.text.is_none() {
                    return fail("needs text");
                }
                &["text"]
            }
            ActionType::Scroll => {
                if self.direction.is_none() {
                    return fail("needs direction");
                }
                &["direction"]
            }
            ActionType::OpenApp => {
                if self.app_name.as_deref().is_none_or(|n| n.trim().is_empty()) {
                    return fail("needs app_name");
                }
                &["app_name"]
            }
            ActionType::Status => {
                if self.goal_status.is_none() {
                    return fail("needs goal_status");
                }
                &["goal_status"]
            }
            ActionType::NavigateHome
            | ActionType::NavigateBack
            | ActionType::KeyboardEnter
            | ActionType::Wait
            | ActionType::Unknown => &[],
        };
        match present.iter().find(|(name, set)| *set && !allowed.contains(name)) {
            Some((name, _)) => fail(&format!("unexpected field {name}")),
            None => Ok(()),
        }
    }

    /// Parses and validates a JSON action object.
    pub fn from_json(text: &str) -> Result<AgentAction, String> {
        let action: AgentAction = serde_json::from_str(text).map_err(|e| e.to_string())?;
        action.validate().map_err(|e| e.to_string())?;
        Ok(action)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("action serializes")
    }
}
