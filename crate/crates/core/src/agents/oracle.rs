//! Hand-written solution scripts for every registered task.
//!
//! A script is a list of intents resolved against the live observation, so
//! the oracle never hard-codes element indices. Each script is padded with
//! `wait` so its length equals the task's `oracle_steps`.

use std::collections::VecDeque;

use chrono::NaiveDate;

use super::{Agent, PolicyStep};
use crate::device::{FieldKind, Scalar};
use crate::error::TaskError;
use crate::screens::apps::{day_label, NOTE_BODY, NOTE_NAME_FIELD};
use crate::screens::{
    AgentAction, AppId, Direction, ElementClass, GoalStatus, Observation, UIElement, EXPENSE_CATEGORIES,
    VISIBLE_CATEGORIES,
};
use crate::tasks::TaskInstance;
use crate::tasks::{this_weekday, week_start};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Text(String),
    Desc(String),
    /// First clickable list item on screen.
    FirstItem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnswerRule {
    /// Titles of the list items on screen, comma separated.
    ItemTitles,
    /// Number of list items with this text dated within [from, to].
    CountItems {
        text: String,
        from: NaiveDate,
        to: NaiveDate,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Intent {
    Open(String),
    Tap(Target),
    Press(Target),
    Type(String),
    Scroll(Direction),
    Home,
    Wait,
    Answer(AnswerRule),
    Done,
}

fn tap_desc(d: &str) -> Intent {
    Intent::Tap(Target::Desc(d.to_string()))
}

fn tap_text(t: &str) -> Intent {
    Intent::Tap(Target::Text(t.to_string()))
}

fn open(app: AppId) -> Intent {
    Intent::Open(app.display_name().to_string())
}

fn parse_date(text: &str) -> Result<NaiveDate, TaskError> {
    Scalar::parse(FieldKind::Date, text)
        .and_then(|s| s.as_date())
        .ok_or_else(|| TaskError::Init(format!("not a date: {text:?}")))
}

/// Number of right scrolls needed before `category` is on screen.
pub fn category_scrolls(category: &str) -> usize {
    let i = EXPENSE_CATEGORIES.iter().position(|c| *c == category).unwrap_or(0);
    if i < VISIBLE_CATEGORIES {
        0
    } else if i < 2 * VISIBLE_CATEGORIES {
        1
    } else {
        2
    }
}

fn leaf_script(inst: &TaskInstance) -> Result<Vec<Intent>, TaskError> {
    use Intent::*;
    let p = |n: &str| inst.param_str(n).to_string();
    let mut s = match inst.name() {
        "SendSms" => vec![
            open(AppId::Messaging),
            tap_desc("Start chat"),
            tap_desc("Phone number"),
            Type(p("number")),
            tap_desc("Message"),
            Type(p("message")),
            tap_text("Send"),
        ],
        "SimpleCalendarAddEvent" => {
            let mut s = vec![open(AppId::Calendar), tap_desc("New event")];
            let date = format!("{}-{}-{}", p("year"), p("month"), p("day"));
            let time = format!("{:02}:00", inst.param_int("hour"));
            for (label, value) in [
                ("Title", p("title")),
                ("Description", p("description")),
                ("Date", date),
                ("Start time", time),
                ("Duration (minutes)", p("duration")),
            ] {
                s.push(tap_desc(label));
                s.push(Type(value));
            }
            s.push(tap_text("Save"));
            s
        }
        "SimpleCalendarDeleteEventsOnRelativeDay" => {
            let day = this_weekday(&p("day_of_week")).ok_or_else(|| TaskError::Init(p("day_of_week")))?;
            let k = inst.setup.records.len();
            let mut s = vec![open(AppId::Calendar), tap_text(&day_label(day))];
            for _ in 0..k {
                s.push(Press(Target::FirstItem));
                s.push(tap_text("Delete"));
            }
            s
        }
        "MarkorCreateNote" => vec![
            open(AppId::Markor),
            tap_desc("Create new file"),
            tap_desc(NOTE_NAME_FIELD),
            Type(p("file_name")),
            tap_text("OK"),
            tap_desc(NOTE_BODY),
            Type(p("text")),
            tap_text("Save"),
        ],
        "MarkorEditNote" => {
            let mut s = vec![open(AppId::Markor), tap_text(&p("file_name"))];
            match p("variant").as_str() {
                "header" => s.extend([
                    Press(Target::Desc(NOTE_BODY.into())),
                    tap_text("Cursor to start"),
                    Type(format!("{}\n", p("text"))),
                ]),
                "footer" => s.extend([tap_desc(NOTE_BODY), Type(format!("\n{}", p("text")))]),
                _ => s.extend([
                    Press(Target::Desc(NOTE_BODY.into())),
                    tap_text("Select all"),
                    Type(p("text")),
                ]),
            }
            s.push(tap_text("Save"));
            s
        }
        "FilesDeleteFile" => vec![
            open(AppId::Files),
            tap_text(&p("subfolder")),
            Press(Target::Text(p("file_name"))),
            tap_text("Delete"),
        ],
        "ExpenseAddSingle" => {
            let mut s = vec![
                open(AppId::Expenses),
                tap_desc("Add expense"),
                tap_desc("Name"),
                Type(p("name")),
                tap_desc("Amount"),
                Type(p("amount")),
            ];
            for _ in 0..category_scrolls(&p("category")) {
                s.push(Scroll(Direction::Right));
            }
            s.push(tap_text(&p("category")));
            s.push(tap_text("Save"));
            s
        }
        "ClockCreateTimer" => vec![
            open(AppId::Clock),
            tap_desc("Hours"),
            Type(inst.param_int("hours").to_string()),
            tap_desc("Minutes"),
            Type(inst.param_int("minutes").to_string()),
            tap_desc("Seconds"),
            Type(inst.param_int("seconds").to_string()),
        ],
        "TurnOnWifi" => vec![open(AppId::Settings), tap_text("Wi-Fi")],
        "OpenApp" => vec![Open(p("app_name"))],
        "SimpleCalendarEventsOnDate" => vec![
            open(AppId::Calendar),
            tap_text(&day_label(parse_date(&p("date"))?)),
            Answer(AnswerRule::ItemTitles),
        ],
        "SportsTrackerActivitiesCountForWeek" => vec![
            open(AppId::Tracker),
            Answer(AnswerRule::CountItems {
                text: p("category"),
                from: week_start(),
                to: week_start() + chrono::Days::new(6),
            }),
        ],
        other => return Err(TaskError::UnknownTask(format!("no oracle for {other}"))),
    };
    let want = inst.definition.oracle_steps;
    if s.len() + 1 > want {
        return Err(TaskError::Init(format!(
            "oracle for {} needs {} steps, budgeted {want}",
            inst.name(),
            s.len() + 1
        )));
    }
    s.resize(want - 1, Wait);
    s.push(Done);
    Ok(s)
}

/// Full script for `instance`. Composite parts are chained with a trip home.
pub fn script(instance: &TaskInstance) -> Result<Vec<Intent>, TaskError> {
    if instance.parts.is_empty() {
        return leaf_script(instance);
    }
    let mut out = Vec::new();
    for (i, part) in instance.parts.iter().enumerate() {
        let mut s = script(part)?;
        if i + 1 < instance.parts.len() {
            if let Some(last) = s.last_mut() {
                *last = Intent::Home;
            }
        }
        out.extend(s);
    }
    Ok(out)
}

fn find<'a>(obs: &'a Observation, target: &Target) -> Option<&'a UIElement> {
    let clickable_first = |pred: &dyn Fn(&UIElement) -> bool| {
        obs.elements
            .iter()
            .filter(|e| pred(e))
            .max_by_key(|e| (e.is_clickable, std::cmp::Reverse(e.index)))
    };
    match target {
        Target::Text(t) => clickable_first(&|e| e.text.as_deref() == Some(t)),
        Target::Desc(d) => clickable_first(&|e| e.content_description.as_deref() == Some(d)),
        Target::FirstItem => obs
            .elements
            .iter()
            .find(|e| e.class_name == ElementClass::ListItem && e.is_clickable),
    }
}

fn answer_text(obs: &Observation, rule: &AnswerRule) -> String {
    let items = obs.elements.iter().filter(|e| e.class_name == ElementClass::ListItem);
    match rule {
        AnswerRule::ItemTitles => items.filter_map(|e| e.text.clone()).collect::<Vec<_>>().join(", "),
        AnswerRule::CountItems { text, from, to } => items
            .filter(|e| e.text.as_deref() == Some(text))
            .filter_map(|e| {
                let desc = e.content_description.as_deref()?;
                let day = desc.split(" · ").next()?;
                let (_, md) = day.split_once(", ")?;
                NaiveDate::parse_from_str(&format!("{md} {}", from.format("%Y")), "%B %-d %Y").ok()
            })
            .filter(|d| d >= from && d <= to)
            .count()
            .to_string(),
    }
}

/// Replays a script against observations. `lenient` controls what happens
/// when a target is missing: the planted agent declares success, the
/// oracle declares the task infeasible so the failure is visible.
struct Runner {
    queue: VecDeque<Intent>,
    on_missing: GoalStatus,
}

impl Runner {
    fn next(&mut self, obs: &Observation) -> PolicyStep {
        let Some(intent) = self.queue.pop_front() else {
            return PolicyStep::new(AgentAction::complete(), "script exhausted");
        };
        let missing = |what: &Target, queue: &mut VecDeque<Intent>, status: GoalStatus| {
            queue.clear();
            PolicyStep::new(AgentAction::status(status), format!("target {what:?} not on screen"))
        };
        match intent {
            Intent::Open(app) => PolicyStep::new(AgentAction::open_app(&app), format!("open {app}")),
            Intent::Tap(t) => match find(obs, &t) {
                Some(e) => PolicyStep::new(AgentAction::click(e.index), format!("tap {t:?}")),
                None => missing(&t, &mut self.queue, self.on_missing),
            },
            Intent::Press(t) => match find(obs, &t) {
                Some(e) => PolicyStep::new(AgentAction::long_press(e.index), format!("long press {t:?}")),
                None => missing(&t, &mut self.queue, self.on_missing),
            },
            Intent::Type(text) => PolicyStep::new(AgentAction::input_text(text), "type"),
            Intent::Scroll(d) => PolicyStep::new(AgentAction::scroll(d), format!("scroll {}", d.as_str())),
            Intent::Home => PolicyStep::new(AgentAction::navigate_home(), "next part"),
            Intent::Wait => PolicyStep::new(AgentAction::wait(), "pad"),
            Intent::Answer(rule) => PolicyStep::new(AgentAction::answer(answer_text(obs, &rule)), "answer"),
            Intent::Done => PolicyStep::new(AgentAction::complete(), "done"),
        }
    }
}

/// Follows the task's solution script exactly.
pub struct OracleAgent {
    runner: Runner,
}

impl OracleAgent {
    pub fn new() -> Self {
        OracleAgent {
            runner: Runner {
                queue: VecDeque::new(),
                on_missing: GoalStatus::Infeasible,
            },
        }
    }
}

impl Default for OracleAgent {
    fn default() -> Self {
        Self::new()
    }
}

impl Agent for OracleAgent {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn begin(&mut self, instance: &TaskInstance) {
        self.runner.queue = match script(instance) {
            Ok(s) => s.into(),
            Err(_) => VecDeque::from([Intent::Done]),
        };
    }

    fn step(&mut self, obs: &Observation, _step_index: usize) -> PolicyStep {
        self.runner.next(obs)
    }
}

/// The oracle with horizontal scrolls and long-presses removed. It solves
/// some parameter values of a task and not others, and claims completion
/// when its next target is missing.
pub struct PlantedAgent {
    runner: Runner,
}

impl PlantedAgent {
    pub fn new() -> Self {
        PlantedAgent {
            runner: Runner {
                queue: VecDeque::new(),
                on_missing: GoalStatus::Complete,
            },
        }
    }
}

impl Default for PlantedAgent {
    fn default() -> Self {
        Self::new()
    }
}

impl Agent for PlantedAgent {
    fn name(&self) -> String {
        "planted".into()
    }

    fn begin(&mut self, instance: &TaskInstance) {
        let s = script(instance).unwrap_or_else(|_| vec![Intent::Done]);
        self.runner.queue = s
            .into_iter()
            .filter(|i| !matches!(i, Intent::Scroll(Direction::Left | Direction::Right) | Intent::Press(_)))
            .collect();
    }

    fn step(&mut self, obs: &Observation, _step_index: usize) -> PolicyStep {
        self.runner.next(obs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scroll_counts() {
        assert_eq!(category_scrolls(EXPENSE_CATEGORIES[0]), 0);
        assert_eq!(category_scrolls(EXPENSE_CATEGORIES[3]), 0);
        assert_eq!(category_scrolls(EXPENSE_CATEGORIES[4]), 1);
        assert_eq!(category_scrolls(EXPENSE_CATEGORIES[9]), 2);
    }
}
