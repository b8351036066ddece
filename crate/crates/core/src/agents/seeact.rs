//! SeeAct-style prompting: a free-form analysis turn, then a multiple-choice
//! turn over the interactable elements answered in three lines
//! (ELEMENT / ACTION / VALUE).
//!
//! The backend takes a single string, so the conversation is flattened with
//! `> Role:` markers. The screen is given as text since there are no
//! screenshots.

use std::collections::VecDeque;
use std::sync::Arc;

use super::backend::ModelBackend;
use super::{Agent, PolicyStep};
use crate::screens::{AgentAction, Direction, ElementClass, GoalStatus, Observation, UIElement};
use crate::tasks::TaskInstance;

/// At most this many candidates are offered as choices.
pub const MAX_CANDIDATES: usize = 50;

pub const SYSTEM_PROMPT: &str = "Imagine that you are imitating humans operating an Android device for a task step by step. At each stage, you can see the Android screen like humans by a screenshot and know the previous actions before the current step decided by yourself through recorded history. You need to decide on the first following action to take. You can tap on an element, long-press an element, swipe, input text, open an app, or use the keyboard enter, home, or back key. (For your understanding, they are like `adb shell input tap', `adb shell input swipe', `adb shell input text', `adb shell am start -n', and `adb shell input keyevent'). One next step means one operation within these actions. Unlike humans, for typing (e.g., in text areas, text boxes), you should try directly typing the input or selecting the choice, bypassing the need for an initial click. You should not attempt to create accounts, log in or do the final submission. Terminate when you deem the task complete or if it requires potentially harmful actions.";

const GUIDANCE: &str = "The screenshot below shows the Android screen you see. Follow the following guidance to think step by step before outlining the next action step at the current stage:

(Current Screen Identification)
Firstly, think about what the current screen is.

(Previous Action Analysis)
Secondly, combined with the screenshot, analyze each step of the previous action history and their intention one by one. Particularly, pay more attention to the last step, which may be more related to what you should do now as the next step. Specifically, if the last action involved a INPUT TEXT, always evaluate whether it necessitates a confirmation step, because typically a single INPUT TEXT action does not make effect. (often, simply pressing 'Enter', assuming the default element involved in the last action, unless other clear elements are present for operation).

(Screenshot Details Analysis)
Closely examine the screenshot to check the status of every part of the screen to understand what you can operate with and what has been set or completed. You should closely examine the screenshot details to see what steps have been completed by previous actions even though you are given the textual previous actions. Because the textual history may not clearly and sufficiently record some effects of previous actions, you should closely evaluate the status of every part of the screen to understand what you have done.

(Next Action Based on Android screen and Analysis)
Then, based on your analysis, in conjunction with human phone operation habits and the logic of app design, decide on the following action. And clearly outline which element on the Android screen users will operate with as the first next target element, its detailed location, and the corresponding operation.

To be successful, it is important to follow the following rules:
1. You should only issue a valid action given the current observation.
2. You should only issue one action at a time
3. For handling the select dropdown elements on a screen, it's not necessary for you to provide completely accurate options right now. The full list of options for these elements will be supplied later.";

const REITERATION: &str = "(Reiteration)
First, reiterate your next target element, its detailed location, and the corresponding operation.

(Multichoice Question)
Below is a multi-choice question, where the choices are elements on the screen. All elements are arranged in the order based on their height on the screen, from top to bottom (and from left to right). This arrangement can be used to locate them. From the screenshot, find out where and what each one is on the screen, taking into account both their text content and details. Then, determine whether one matches your target element. Please examine the choices one by one. Choose the matching one. If multiple options match your answer, choose the most likely one by re-examining the screenshot, the choices, and your further reasoning. If you would like to perform a swipe action, you can optionally select the choice where you will swipe.";

const FINAL_ANSWER: &str = "(Final Answer)
Finally, conclude your answer using the format below. Ensure your answer is strictly adhering to the format provided below. Please do not leave any explanation in your answers of the final standardized format part, and this final part should be clear and certain. The element choice, action, and value should be in three separate lines.

Format:

ELEMENT: The uppercase letter of your choice. (No need for TERMINATE, KEYBOARD ENTER, WAIT, ANSWER, OPEN APP, NAVIGATE HOME, NAVIGATE BACK; and optional for SWIPE.)

ACTION: Choose an action from {CLICK, INPUT TEXT, LONG PRESS, NAVIGATE BACK, TERMINATE, KEYBOARD ENTER, SWIPE, WAIT, ANSWER, OPEN APP, NAVIGATE HOME}.

VALUE: Provide additional input based on ACTION.

The VALUE means:
If ACTION == INPUT TEXT, specify the text to be typed.
If ACTION == SWIPE, specify the direction: up, down, left, right.
If ACTION == OPEN APP, provide the name of the app to be opened.
If ACTION == ANSWER, specify the text of your answer to respond directly to a question or request for information.
For CLICK, LONG PRESS, KEYBOARD ENTER, NAVIGATE HOME, NAVIGATE BACK, WAIT, and TERMINATE, write \"None\".";

/// Choice letter for the `i`-th candidate: A..Y, then AA..AY, BA..BY and
/// so on. A bare Z is kept for "none of the above".
pub fn choice_label(i: usize) -> String {
    let letter = |k: usize| (b'A' + k as u8) as char;
    if i < 25 {
        return letter(i).to_string();
    }
    let mut out = vec![letter(i % 25)];
    let mut rest = i / 25;
    while rest > 0 {
        rest -= 1;
        out.push(letter(rest % 25));
        rest /= 25;
    }
    out.iter().rev().collect()
}

fn kind_word(class: ElementClass) -> &'static str {
    match class {
        ElementClass::TextView => "text",
        ElementClass::EditText => "input field",
        ElementClass::Button => "button",
        ElementClass::Checkbox => "checkbox",
        ElementClass::ImageButton => "icon",
        ElementClass::ListItem => "list item",
    }
}

/// Interactable elements offered as choices, plus how many were cut off.
pub fn candidates(obs: &Observation) -> (Vec<&UIElement>, usize) {
    let all: Vec<&UIElement> = obs.elements.iter().filter(|e| e.is_interactable()).collect();
    let overflow = all.len().saturating_sub(MAX_CANDIDATES);
    (all.into_iter().take(MAX_CANDIDATES).collect(), overflow)
}

pub fn describe_choice(e: &UIElement) -> String {
    let name = e.label().unwrap_or("");
    let mut s = format!("\"{name}\" {}", kind_word(e.class_name));
    if let (Some(t), Some(d)) = (&e.text, &e.content_description) {
        if t != d {
            s.push_str(&format!(" ({d})"));
        }
    }
    if e.is_focused {
        s.push_str(", focused");
    }
    if e.is_checked {
        s.push_str(", checked");
    }
    s
}

/// Text rendering of the whole screen, used where a screenshot would go.
pub fn screen_text(obs: &Observation) -> String {
    let mut out = format!("Current app: {}. Screen: {}.\n", obs.foreground_app, obs.screen_id);
    for e in &obs.elements {
        let b = e.bbox;
        out.push_str(&format!(
            "- {} at ({}, {})-({}, {})\n",
            describe_choice(e),
            b.x_min,
            b.y_min,
            b.x_max,
            b.y_max
        ));
    }
    out
}

pub fn first_turn_prompt(goal: &str, previous: &[String], obs: &Observation) -> String {
    let prev = if previous.is_empty() {
        "None".to_string()
    } else {
        previous.join("\n")
    };
    format!(
        "> Role: SYSTEM\n{SYSTEM_PROMPT}\n\n> Role: USER\nYou are asked to complete the following task: {goal}\n\nPrevious Actions:\n{prev}\n\n{GUIDANCE}\n\nScreen description:\n{}",
        screen_text(obs)
    )
}

pub fn second_turn_prompt(first_prompt: &str, first_reply: &str, obs: &Observation) -> String {
    let (cands, overflow) = candidates(obs);
    let mut choices = String::new();
    for (i, e) in cands.iter().enumerate() {
        choices.push_str(&format!("{}. {}\n", choice_label(i), describe_choice(e)));
    }
    if overflow > 0 {
        choices.push_str(&format!("({overflow} more elements are not listed)\n"));
    }
    format!(
        "{first_prompt}\n> Role: ASSISTANT\n{first_reply}\n\n> Role: USER\n{REITERATION}\n\n{choices}If none of these elements match your target element, please select Z. None of the other options match the correct element.\n\n{FINAL_ANSWER}"
    )
}

/// The action to take now, and an optional follow-up for the next step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub action: AgentAction,
    pub then: Option<AgentAction>,
}

impl Decision {
    fn one(action: AgentAction) -> Self {
        Decision { action, then: None }
    }
}

const KEYS: [&str; 3] = ["ELEMENT:", "ACTION:", "VALUE:"];

/// Value after the last `key`, cut at the next key or line break.
fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    let start = text.rfind(key)? + key.len();
    let rest = &text[start..];
    let mut end = rest.find('\n').unwrap_or(rest.len());
    for k in KEYS {
        if let Some(p) = rest.find(k) {
            end = end.min(p);
        }
    }
    let v = rest[..end].trim().trim_end_matches([',', ';']).trim();
    let v = v.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(v);
    Some(v)
}

fn is_none(v: Option<&str>) -> bool {
    v.is_none_or(|v| v.is_empty() || v.eq_ignore_ascii_case("none"))
}

/// Maps the three-line answer onto an action. Never fails: anything that
/// cannot be grounded becomes `unknown`.
pub fn parse_answer(text: &str, candidates: &[&UIElement]) -> Decision {
    let unknown = || Decision::one(AgentAction::unknown());
    let Some(action) = field(text, "ACTION:") else {
        return unknown();
    };
    let value = field(text, "VALUE:");
    let element = field(text, "ELEMENT:")
        .map(|v| v.trim_end_matches('.').trim())
        .and_then(|label| (0..candidates.len()).find(|i| choice_label(*i) == label))
        .map(|i| candidates[i]);
    let action = action.to_ascii_uppercase().replace('_', " ");
    let action = action.split_whitespace().collect::<Vec<_>>().join(" ");
    match action.as_str() {
        "CLICK" => element.map_or_else(unknown, |e| Decision::one(AgentAction::click(e.index))),
        "LONG PRESS" => element.map_or_else(unknown, |e| Decision::one(AgentAction::long_press(e.index))),
        "INPUT TEXT" | "TYPE" => {
            let Some(text) = value else { return unknown() };
            match element {
                Some(e) if !e.is_focused => Decision {
                    action: AgentAction::click(e.index),
                    then: Some(AgentAction::input_text(text)),
                },
                _ => Decision::one(AgentAction::input_text(text)),
            }
        }
        "SWIPE" | "SCROLL" => value
            .and_then(Direction::parse)
            .map_or_else(unknown, |d| Decision::one(AgentAction::scroll(d))),
        "OPEN APP" => match value {
            Some(v) if !is_none(Some(v)) => Decision::one(AgentAction::open_app(v)),
            _ => unknown(),
        },
        "ANSWER" => value.map_or_else(unknown, |v| Decision::one(AgentAction::answer(v))),
        "TERMINATE" => Decision::one(AgentAction::status(GoalStatus::Complete)),
        "KEYBOARD ENTER" => Decision::one(AgentAction::keyboard_enter()),
        "NAVIGATE HOME" => Decision::one(AgentAction::navigate_home()),
        "NAVIGATE BACK" => Decision::one(AgentAction::navigate_back()),
        "WAIT" => Decision::one(AgentAction::wait()),
        _ => unknown(),
    }
}

pub struct SeeActAgent {
    backend: Arc<dyn ModelBackend>,
    goal: String,
    previous: Vec<String>,
    pending: VecDeque<AgentAction>,
}

impl SeeActAgent {
    pub fn new(backend: Arc<dyn ModelBackend>) -> Self {
        SeeActAgent {
            backend,
            goal: String::new(),
            previous: Vec::new(),
            pending: VecDeque::new(),
        }
    }
}

impl Agent for SeeActAgent {
    fn name(&self) -> String {
        "seeact".into()
    }

    fn begin(&mut self, instance: &TaskInstance) {
        self.goal = instance.goal.clone();
        self.previous.clear();
        self.pending.clear();
    }

    fn step(&mut self, obs: &Observation, _step_index: usize) -> PolicyStep {
        if let Some(action) = self.pending.pop_front() {
            return PolicyStep::new(action, "follow-up of the previous choice");
        }
        let first = first_turn_prompt(&self.goal, &self.previous, obs);
        let analysis = match self.backend.complete(&first) {
            Ok(a) => a,
            Err(e) => return PolicyStep::new(AgentAction::unknown(), e.to_string()),
        };
        let second = second_turn_prompt(&first, &analysis, obs);
        let answer = match self.backend.complete(&second) {
            Ok(a) => a,
            Err(e) => return PolicyStep::new(AgentAction::unknown(), e.to_string()),
        };
        let (cands, _) = candidates(obs);
        let decision = parse_answer(&answer, &cands);
        self.pending.extend(decision.then);
        PolicyStep::new(decision.action, answer)
    }

    fn after_step(
        &mut self,
        _before: &Observation,
        _after: Option<&Observation>,
        step: &PolicyStep,
        result: &crate::screens::TransitionResult,
    ) {
        if !result.applied {
            self.pending.clear();
        }
        self.previous.push(step.action.to_json());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screens::BBox;

    fn el(index: usize, text: &str) -> UIElement {
        UIElement {
            index,
            text: Some(text.into()),
            content_description: None,
            class_name: ElementClass::Button,
            bbox: BBox {
                x_min: 0,
                y_min: 0,
                x_max: 10,
                y_max: 10,
            },
            is_clickable: true,
            is_scrollable: false,
            is_focused: false,
            is_checked: false,
        }
    }

    #[test]
    fn labels() {
        assert_eq!(choice_label(0), "A");
        assert_eq!(choice_label(24), "Y");
        assert_eq!(choice_label(25), "AA");
        assert_eq!(choice_label(49), "AY");
    }

    #[test]
    fn three_line_answers() {
        let els = [el(3, "a"), el(4, "b"), el(7, "c")];
        let c: Vec<&UIElement> = els.iter().collect();
        assert_eq!(
            parse_answer("ELEMENT: C\nACTION: CLICK\nVALUE: None", &c).action,
            AgentAction::click(7)
        );
        assert_eq!(
            parse_answer("ACTION: SWIPE, VALUE: down", &c).action,
            AgentAction::scroll(Direction::Down)
        );
        assert_eq!(
            parse_answer("ACTION: OPEN APP\nVALUE: Markor", &c).action,
            AgentAction::open_app("Markor")
        );
        let d = parse_answer("ELEMENT: A\nACTION: INPUT TEXT\nVALUE: hi", &c);
        assert_eq!(d.action, AgentAction::click(3));
        assert_eq!(d.then, Some(AgentAction::input_text("hi")));
        assert_eq!(
            parse_answer("ELEMENT: Z\nACTION: CLICK\nVALUE: None", &c).action,
            AgentAction::unknown()
        );
    }
}
