//! Text-only M3A: one call to pick an action from the element list, and one
//! call after the step to summarize what happened. The summaries form the
//! history shown in later prompts.

use std::fmt::Write as _;
use std::sync::Arc;

use super::backend::ModelBackend;
use super::{Agent, HistoryEntry, PolicyStep};
use crate::screens::{AgentAction, Observation, TransitionResult, UIElement};
use crate::tasks::TaskInstance;

/// Guideline block shipped with the crate.
pub const GUIDELINES: &str = include_str!("../../assets/m3a_guidelines.txt");

pub const EMPTY_HISTORY: &str = "You just started, no action has been performed yet.";

const PREAMBLE: &str = "You are an agent who can operate an Android phone on behalf of a user. \
Based on the user's goal, you may complete tasks that require operating on the phone, \
or answer a question using what is shown on the screen.";

const ACTION_LIST: &str = r#"At each step you must pick one of the following actions, written as JSON:
- Click on an element: {"action_type": "click", "index": <target_index>}
- Long press on an element: {"action_type": "long_press", "index": <target_index>}
- Type into the focused field: {"action_type": "input_text", "text": <text_input>}
- Press the Enter key: {"action_type": "keyboard_enter"}
- Go to the home screen: {"action_type": "navigate_home"}
- Go back: {"action_type": "navigate_back"}
- Scroll the screen: {"action_type": "scroll", "direction": <up, down, left, right>}
- Open an app: {"action_type": "open_app", "app_name": <name>}
- Wait for the screen to update: {"action_type": "wait"}
- Answer the user's question: {"action_type": "answer", "text": <answer_text>}
- Finish: {"action_type": "status", "goal_status": "complete"}
- Give up when the task is impossible: {"action_type": "status", "goal_status": "infeasible"}"#;

const ACTION_FOOTER: &str = "Now output an action from the above list in the correct JSON format, following the reason why you do that. Your answer should look like:\n\nReason: ...\nAction: {\"action_type\":...}";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct M3aConfig {
    /// `None` leaves the guideline block out.
    pub guidelines: Option<String>,
    pub reflection: bool,
}

impl Default for M3aConfig {
    fn default() -> Self {
        M3aConfig {
            guidelines: Some(GUIDELINES.to_string()),
            reflection: true,
        }
    }
}

impl M3aConfig {
    /// No guidelines, no reflection.
    pub fn simple() -> Self {
        M3aConfig {
            guidelines: None,
            reflection: false,
        }
    }
}

fn quoted(value: Option<&str>) -> String {
    match value {
        None => "None".to_string(),
        Some(v) => {
            let mut out = String::with_capacity(v.len() + 2);
            out.push('"');
            for c in v.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
            out
        }
    }
}

fn py_bool(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

/// `UIElement(...)` description of one element.
pub fn describe_element(e: &UIElement) -> String {
    format!(
        "UIElement(text={}, content_description={}, class_name=\"{}\", bbox_pixels=BoundingBox(x_min={}, x_max={}, y_min={}, y_max={}), is_clickable={}, is_scrollable={}, is_focused={}, is_checked={})",
        quoted(e.text.as_deref()),
        quoted(e.content_description.as_deref()),
        e.class_name.android_name(),
        e.bbox.x_min,
        e.bbox.x_max,
        e.bbox.y_min,
        e.bbox.y_max,
        py_bool(e.is_clickable),
        py_bool(e.is_scrollable),
        py_bool(e.is_focused),
        py_bool(e.is_checked),
    )
}

/// One `UIelement{i}: ...` line per element.
pub fn element_list(obs: &Observation) -> String {
    let mut out = String::new();
    for e in &obs.elements {
        let _ = writeln!(out, "UIelement{}: {}", e.index, describe_element(e));
    }
    out
}

fn history_text(history: &[HistoryEntry]) -> String {
    if history.is_empty() {
        return EMPTY_HISTORY.to_string();
    }
    history
        .iter()
        .map(|h| format!("Step {}- {}", h.step_index, h.summary))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn build_action_prompt(
    goal: &str,
    obs: &Observation,
    history: &[HistoryEntry],
    guidelines: Option<&str>,
) -> String {
    let mut p = String::new();
    let _ = write!(
        p,
        "{PREAMBLE}\n\nThe current user goal/request is: {goal}\n\n{ACTION_LIST}\n\n\
Here is a history of what you have done so far:\n{}\n\n\
The current app is {} and the screen is {}.\n\
Here is a list of descriptions for some UI elements on the current screen:\n\n{}\n",
        history_text(history),
        obs.foreground_app,
        obs.screen_id,
        element_list(obs),
    );
    if let Some(g) = guidelines {
        p.push_str(g.trim_end());
        p.push_str("\n\n");
    }
    p.push_str(ACTION_FOOTER);
    p
}

pub fn build_reflection_prompt(goal: &str, before: &Observation, after: &Observation, step: &PolicyStep) -> String {
    format!(
        "{PREAMBLE}\n\nThe (overall) user goal/request is: {goal}\n\
Now I want you to help summarize the latest step.\n\n\
Here is a list of descriptions for some UI elements on the screen before the action:\n\n{}\n\
Here is a list of descriptions for some UI elements on the screen after the action:\n\n{}\n\
The action taken was: {}\n\
The reason given for it was: {}\n\n\
Compare the two screens and say whether the action had the intended effect. \
Keep the summary short and mention anything worth remembering for later steps, such as text that was typed or an answer that was found.\n\
Summary of this step: ",
        element_list(before),
        element_list(after),
        step.action.to_json(),
        step.reason,
    )
}

/// Byte range of the first balanced `{...}` at or after `from`, skipping
/// braces inside JSON strings.
fn balanced_object(text: &str, from: usize) -> Option<&str> {
    let start = from + text[from..].find('{')?;
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if in_str {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Reads `Reason:` and the first JSON object after `Action:`. Anything that
/// does not yield a valid action becomes `unknown`, keeping the raw output
/// as the reason.
pub fn parse_action(output: &str) -> PolicyStep {
    let action_at = output.find("Action:");
    let reason = output
        .find("Reason:")
        .map(|r| {
            let end = action_at.filter(|a| *a > r).unwrap_or(output.len());
            output[r + "Reason:".len()..end].trim().to_string()
        })
        .unwrap_or_default();
    let parsed = action_at
        .and_then(|a| balanced_object(output, a + "Action:".len()))
        .and_then(|json| AgentAction::from_json(json).ok());
    match parsed {
        Some(action) => PolicyStep::new(action, reason),
        None => PolicyStep::new(AgentAction::unknown(), output.to_string()),
    }
}

/// Calls the backend once to summarize a step.
pub fn reflect(
    goal: &str,
    step_index: usize,
    before: &Observation,
    after: &Observation,
    step: &PolicyStep,
    backend: &dyn ModelBackend,
) -> HistoryEntry {
    let prompt = build_reflection_prompt(goal, before, after, step);
    let summary = backend
        .complete(&prompt)
        .unwrap_or_else(|_| format!("step {step_index}: no summary (backend error)"));
    HistoryEntry { step_index, summary }
}

pub struct M3aAgent {
    backend: Arc<dyn ModelBackend>,
    config: M3aConfig,
    goal: String,
    history: Vec<HistoryEntry>,
    step_index: usize,
}

impl M3aAgent {
    pub fn new(backend: Arc<dyn ModelBackend>, config: M3aConfig) -> Self {
        M3aAgent {
            backend,
            config,
            goal: String::new(),
            history: Vec::new(),
            step_index: 0,
        }
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn action_prompt(&self, obs: &Observation) -> String {
        build_action_prompt(&self.goal, obs, &self.history, self.config.guidelines.as_deref())
    }
}

impl Agent for M3aAgent {
    fn name(&self) -> String {
        if self.config.reflection || self.config.guidelines.is_some() {
            "m3a".into()
        } else {
            "m3a_simple".into()
        }
    }

    fn begin(&mut self, instance: &TaskInstance) {
        self.goal = instance.goal.clone();
        self.history.clear();
        self.step_index = 0;
    }

    fn step(&mut self, obs: &Observation, step_index: usize) -> PolicyStep {
        self.step_index = step_index;
        match self.backend.complete(&self.action_prompt(obs)) {
            Ok(out) => parse_action(&out),
            Err(e) => PolicyStep::new(AgentAction::unknown(), e.to_string()),
        }
    }

    fn after_step(
        &mut self,
        before: &Observation,
        after: Option<&Observation>,
        step: &PolicyStep,
        _result: &TransitionResult,
    ) {
        let entry = match (self.config.reflection, after) {
            (true, Some(after)) => reflect(&self.goal, self.step_index, before, after, step, self.backend.as_ref()),
            (true, None) => return,
            (false, _) => HistoryEntry {
                step_index: self.step_index,
                summary: format!("Action taken: {}", step.action.to_json()),
            },
        };
        self.history.push(entry);
    }
}
