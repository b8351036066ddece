//! The shipped task catalog.

use std::collections::BTreeMap;

use chrono::{Duration as Days, NaiveDate, NaiveTime};

use super::params::{self, get_int, get_str, ParamSpec, Params};
use super::{compose_with, Mutation, TaskDefinition, TaskInstance, TaskKind, TaskLogic, TaskSetup};
use crate::device::{Fields, Predicate, Scalar, SettingValue, Write};
use crate::error::TaskError;
use crate::rng::SplitMix64;
use crate::screens::{apps, AgentAction, AppId, EXPENSE_CATEGORIES, NOTES_DIR};
use crate::session::Session;
use crate::validators;

pub const WEEKDAYS: [&str; 7] = [
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
];

/// Monday of the week containing the fixed device date.
pub fn week_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 10, 9).expect("valid date")
}

/// Date that "this {weekday}" refers to: the day of the Monday-to-Sunday
/// week that contains 2023-10-15.
pub fn this_weekday(name: &str) -> Option<NaiveDate> {
    let i = WEEKDAYS.iter().position(|d| d.eq_ignore_ascii_case(name))?;
    Some(week_start() + Days::days(i as i64))
}

pub const FILE_FOLDERS: [&str; 5] = ["Documents", "Download", "Movies", "Music", "Pictures"];
const DURATIONS: [&str; 6] = ["15", "30", "45", "60", "90", "120"];

fn fields(pairs: &[(&str, Scalar)]) -> Fields {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn distractor_count(rng: &mut SplitMix64) -> usize {
    3 + rng.below(3) as usize
}

/// A nearby but different value of the same kind.
pub fn perturb(value: &Scalar) -> Scalar {
    match value {
        Scalar::Str(s) => {
            let mut out = s.clone();
            match out.pop() {
                Some(c) if c.is_ascii_digit() => {
                    let d = c.to_digit(10).expect("digit");
                    out.push(char::from_digit((d + 1) % 10, 10).expect("digit"));
                }
                Some(c) => {
                    out.push(c);
                    out.push('x');
                }
                None => out.push('x'),
            }
            Scalar::Str(out)
        }
        Scalar::Int(v) => Scalar::Int(v + 1),
        Scalar::Duration(v) => Scalar::Duration(v + 1),
        Scalar::Date(d) => Scalar::Date(*d + Days::days(1)),
        Scalar::Time(t) => Scalar::Time(*t + chrono::Duration::minutes(1)),
    }
}

/// Rewrites `field` of every row that carries all of `expected`.
fn perturb_rows(app: &'static str, table: &'static str, expected: Fields, field: &'static str) -> Mutation {
    Mutation::new(format!("{app}.{table}.{field} changed"), move |s: &mut Session| {
        let matching = s
            .device
            .query(app, table, &Predicate::fields_eq(&expected))
            .expect("declared table");
        for row in matching {
            let mut f = row.fields.clone();
            if let Some(v) = f.get_mut(field) {
                *v = perturb(v);
            }
            s.device
                .apply(&Write::delete_rows(app, table, Predicate::RowId(row.row_id)))
                .expect("delete");
            s.device.apply(&Write::insert_row(app, table, f)).expect("insert");
        }
    })
}

fn restore_row(app: &'static str, table: &'static str, row: Fields) -> Mutation {
    Mutation::new(format!("{app}.{table} target row restored"), move |s: &mut Session| {
        s.device
            .apply(&Write::insert_row(app, table, row.clone()))
            .expect("insert");
    })
}

fn note_path(name: &str) -> String {
    format!("{NOTES_DIR}/{name}")
}

fn other_file_name(rng: &mut SplitMix64, ext: &'static str, avoid: &[String]) -> String {
    loop {
        let name = ParamSpec::FileName { ext }.sample(rng).expect("drawn").to_string();
        if !avoid.contains(&name) {
            return name;
        }
    }
}

// ---------------------------------------------------------------- SendSms

struct SendSms;

impl TaskLogic for SendSms {
    fn setup(&self, params: &Params, _rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        Ok(TaskSetup {
            writes: vec![Write::clear_table("messaging", "sms")],
            records: vec![fields(&[
                ("number", Scalar::str(get_str(params, "number"))),
                ("body", Scalar::str(get_str(params, "message"))),
            ])],
            ..TaskSetup::default()
        })
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        let ok = validators::message_exists(
            &session.device,
            instance.param_str("number"),
            instance.param_str("message"),
        );
        f64::from(u8::from(ok))
    }

    fn mutations(&self, instance: &TaskInstance) -> Vec<Mutation> {
        let number = instance.param_str("number").to_string();
        let body = instance.param_str("message").to_string();
        let sent = move |s: &Session| {
            s.device
                .query("messaging", "sms", &Predicate::All)
                .unwrap_or_default()
                .into_iter()
                .filter(|r| {
                    r.get("number")
                        .and_then(Scalar::as_str)
                        .map(validators::normalize_number)
                        == Some(validators::normalize_number(&number))
                        && r.get("body").and_then(Scalar::as_str).map(validators::normalize_body)
                            == Some(validators::normalize_body(&body))
                })
                .collect::<Vec<_>>()
        };
        ["number", "body"]
            .into_iter()
            .map(|field| {
                let sent = sent.clone();
                Mutation::new(format!("messaging.sms.{field} changed"), move |s: &mut Session| {
                    for row in sent(s) {
                        let mut f = row.fields.clone();
                        if let Some(v) = f.get_mut(field) {
                            *v = perturb(v);
                        }
                        s.device
                            .apply(&Write::delete_rows("messaging", "sms", Predicate::RowId(row.row_id)))
                            .expect("delete");
                        s.device
                            .apply(&Write::insert_row("messaging", "sms", f))
                            .expect("insert");
                    }
                })
            })
            .collect()
    }
}

// ------------------------------------------------------------ calendar

fn event(title: &str, description: &str, date: NaiveDate, hour: i64, minutes: i64) -> Fields {
    fields(&[
        ("title", Scalar::str(title)),
        ("description", Scalar::str(description)),
        ("start_date", Scalar::Date(date)),
        (
            "start_time",
            Scalar::Time(NaiveTime::from_hms_opt(hour as u32, 0, 0).expect("hour in range")),
        ),
        ("duration_min", Scalar::Duration(minutes)),
        ("repeat_rule", Scalar::str("")),
    ])
}

fn random_event(rng: &mut SplitMix64, date: NaiveDate) -> Fields {
    let title = rng.pick(params::TITLES);
    let description = rng.pick(params::DESCRIPTIONS);
    let hour = rng.range_inclusive(8, 19);
    let minutes: i64 = rng.pick(&DURATIONS).parse().expect("numeric");
    event(title, description, date, hour, minutes)
}

const EVENT_FIELDS: [&str; 6] = [
    "title",
    "description",
    "start_date",
    "start_time",
    "duration_min",
    "repeat_rule",
];

struct CalendarAddEvent;

impl CalendarAddEvent {
    fn goal_event(params: &Params) -> Option<Fields> {
        let date = NaiveDate::from_ymd_opt(
            get_str(params, "year").parse().ok()?,
            get_str(params, "month").parse().ok()?,
            get_str(params, "day").parse().ok()?,
        )?;
        Some(event(
            get_str(params, "title"),
            get_str(params, "description"),
            date,
            get_int(params, "hour"),
            get_str(params, "duration").parse().ok()?,
        ))
    }
}

impl TaskLogic for CalendarAddEvent {
    fn setup(&self, params: &Params, rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        let goal = Self::goal_event(params).ok_or_else(|| TaskError::Init("invalid event parameters".into()))?;
        let mut writes = vec![Write::clear_table("calendar", "events")];
        let n = distractor_count(rng);
        let mut placed = 0;
        while placed < n {
            let date = NaiveDate::from_ymd_opt(2023, 10, 1).expect("valid") + Days::days(rng.below(45) as i64);
            let e = random_event(rng, date);
            if e.get("title") == goal.get("title") {
                continue;
            }
            writes.push(Write::insert_row("calendar", "events", e));
            placed += 1;
        }
        Ok(TaskSetup {
            writes,
            records: vec![goal],
            distractors: n,
            answer: None,
        })
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        let ok = validators::event_exists(&session.device, &instance.setup.records[0]).unwrap_or(false);
        f64::from(u8::from(ok))
    }

    fn mutations(&self, instance: &TaskInstance) -> Vec<Mutation> {
        let goal = instance.setup.records[0].clone();
        EVENT_FIELDS
            .into_iter()
            .map(|f| perturb_rows("calendar", "events", goal.clone(), f))
            .collect()
    }
}

struct CalendarDeleteOnRelativeDay;

impl TaskLogic for CalendarDeleteOnRelativeDay {
    fn setup(&self, params: &Params, rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        let target =
            this_weekday(get_str(params, "day_of_week")).ok_or_else(|| TaskError::Init("unknown weekday".into()))?;
        let k = 1 + rng.below(3) as usize;
        let targets: Vec<Fields> = (0..k).map(|_| random_event(rng, target)).collect();
        let n = distractor_count(rng);
        let mut rows: Vec<Fields> = targets.clone();
        while rows.len() < k + n {
            let date = week_start() + Days::days(rng.below(14) as i64);
            if date == target {
                continue;
            }
            rows.push(random_event(rng, date));
        }
        rng.shuffle(&mut rows);
        let mut writes = vec![Write::clear_table("calendar", "events")];
        writes.extend(rows.into_iter().map(|r| Write::insert_row("calendar", "events", r)));
        Ok(TaskSetup {
            writes,
            records: targets,
            distractors: n,
            answer: None,
        })
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        let all_gone = instance.setup.records.iter().all(|e| {
            validators::rows_match(
                &session.device,
                &validators::RowPattern::absent("calendar", "events", e.clone()),
            )
            .unwrap_or(false)
        });
        f64::from(u8::from(all_gone))
    }

    fn mutations(&self, instance: &TaskInstance) -> Vec<Mutation> {
        instance
            .setup
            .records
            .iter()
            .map(|e| restore_row("calendar", "events", e.clone()))
            .collect()
    }
}

// ------------------------------------------------------------- notes

fn notes_noise(rng: &mut SplitMix64, avoid: &str) -> (Vec<Write>, usize) {
    let n = distractor_count(rng);
    let mut taken = vec![avoid.to_string()];
    let mut writes = Vec::new();
    for _ in 0..n {
        let name = other_file_name(rng, "md", &taken);
        let body = ParamSpec::Sentence.sample(rng).expect("drawn").to_string();
        writes.push(Write::put_file(note_path(&name), body));
        taken.push(name);
    }
    (writes, n)
}

fn rewrite_file(path: String, label: &str, edit: fn(&mut Vec<u8>)) -> Mutation {
    Mutation::new(label.to_string(), move |s: &mut Session| {
        if let Some(f) = s.device.file(&path) {
            let mut content = f.content.clone();
            edit(&mut content);
            s.device.apply(&Write::put_file(path.clone(), content)).expect("write");
        }
    })
}

fn rename_file(path: String) -> Mutation {
    Mutation::new("file renamed", move |s: &mut Session| {
        if let Some(f) = s.device.file(&path) {
            let content = f.content.clone();
            s.device.apply(&Write::delete_file(path.clone())).expect("delete");
            s.device
                .apply(&Write::put_file(format!("{path}x"), content))
                .expect("write");
        }
    })
}

struct MarkorCreateNote;

impl TaskLogic for MarkorCreateNote {
    fn setup(&self, params: &Params, rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        let (noise, n) = notes_noise(rng, get_str(params, "file_name"));
        Ok(TaskSetup {
            writes: noise,
            distractors: n,
            ..TaskSetup::default()
        })
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        let ok = validators::file_exists(
            &session.device,
            &note_path(instance.param_str("file_name")),
            Some(instance.param_str("text").as_bytes()),
        );
        f64::from(u8::from(ok))
    }

    fn mutations(&self, instance: &TaskInstance) -> Vec<Mutation> {
        let path = note_path(instance.param_str("file_name"));
        vec![
            rewrite_file(path.clone(), "note content changed", |c| c.push(b'x')),
            rename_file(path),
        ]
    }
}

pub const EDIT_VARIANTS: [&str; 3] = ["header", "footer", "replace"];

struct MarkorEditNote;

impl TaskLogic for MarkorEditNote {
    fn derive(&self, params: &mut Params) {
        let text = get_str(params, "text").to_string();
        let original = get_str(params, "original").to_string();
        let (operation, expected) = match get_str(params, "variant") {
            "header" => (
                format!("Add the following header to the top of the note: {text}"),
                format!("{text}\n{original}"),
            ),
            "footer" => (
                format!("Add the following footer to the bottom of the note: {text}"),
                format!("{original}\n{text}"),
            ),
            _ => (
                format!("Replace the entire content of the note with: {text}"),
                text.clone(),
            ),
        };
        params.insert("file_operation".into(), Scalar::str(operation));
        params.insert("expected_content".into(), Scalar::str(expected));
    }

    fn setup(&self, params: &Params, rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        let name = get_str(params, "file_name");
        let mut writes = vec![Write::put_file(note_path(name), get_str(params, "original"))];
        let (noise, n) = notes_noise(rng, name);
        writes.extend(noise);
        Ok(TaskSetup {
            writes,
            distractors: n,
            ..TaskSetup::default()
        })
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        let ok = validators::file_exists(
            &session.device,
            &note_path(instance.param_str("file_name")),
            Some(instance.param_str("expected_content").as_bytes()),
        );
        f64::from(u8::from(ok))
    }

    fn mutations(&self, instance: &TaskInstance) -> Vec<Mutation> {
        let path = note_path(instance.param_str("file_name"));
        vec![
            rewrite_file(path.clone(), "note content changed", |c| c.push(b'x')),
            rewrite_file(path.clone(), "note content truncated", |c| {
                c.pop();
            }),
            rename_file(path),
        ]
    }
}

// ------------------------------------------------------------- files

struct FilesDeleteFile;

impl FilesDeleteFile {
    fn target(params: &Params) -> String {
        format!(
            "/sdcard/{}/{}",
            get_str(params, "subfolder"),
            get_str(params, "file_name")
        )
    }
}

impl TaskLogic for FilesDeleteFile {
    fn setup(&self, params: &Params, rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        let target = Self::target(params);
        let folder = get_str(params, "subfolder");
        let mut writes = vec![Write::put_file(
            target.clone(),
            format!("contents of {}", get_str(params, "file_name")),
        )];
        let n = distractor_count(rng);
        let mut taken = vec![get_str(params, "file_name").to_string()];
        for _ in 0..n {
            let name = other_file_name(rng, "txt", &taken);
            writes.push(Write::put_file(
                format!("/sdcard/{folder}/{name}"),
                format!("contents of {name}"),
            ));
            taken.push(name);
        }
        Ok(TaskSetup {
            writes,
            distractors: n,
            ..TaskSetup::default()
        })
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        f64::from(u8::from(!validators::file_exists(
            &session.device,
            &Self::target(&instance.params),
            None,
        )))
    }

    fn mutations(&self, instance: &TaskInstance) -> Vec<Mutation> {
        let path = Self::target(&instance.params);
        vec![Mutation::new("target file restored", move |s: &mut Session| {
            s.device
                .apply(&Write::put_file(path.clone(), "restored"))
                .expect("write");
        })]
    }
}

// ------------------------------------------------------------ expenses

struct ExpenseAddSingle;

impl ExpenseAddSingle {
    fn goal(params: &Params) -> Fields {
        fields(&[
            ("name", Scalar::str(get_str(params, "name"))),
            ("amount_cents", Scalar::Int(get_int(params, "amount_cents"))),
            ("category", Scalar::str(get_str(params, "category"))),
        ])
    }
}

impl TaskLogic for ExpenseAddSingle {
    fn derive(&self, params: &mut Params) {
        let cents = get_int(params, "amount_cents");
        let amount = format!("{}.{:02}", cents / 100, cents % 100);
        let csv = format!(
            "name: {}, amount: {amount}, category: {}",
            get_str(params, "name"),
            get_str(params, "category")
        );
        params.insert("amount".into(), Scalar::str(amount));
        params.insert("expense_csv".into(), Scalar::str(csv));
    }

    fn setup(&self, params: &Params, rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        let mut writes = vec![Write::clear_table("expenses", "items")];
        let n = distractor_count(rng);
        let mut placed = 0;
        while placed < n {
            let name = rng.pick(params::EXPENSE_NAMES);
            let cents = rng.range_inclusive(100, 50_000);
            let category = rng.pick(&EXPENSE_CATEGORIES);
            if *name == get_str(params, "name") {
                continue;
            }
            writes.push(Write::insert_row(
                "expenses",
                "items",
                fields(&[
                    ("name", Scalar::str(*name)),
                    ("amount_cents", Scalar::Int(cents)),
                    ("category", Scalar::str(*category)),
                ]),
            ));
            placed += 1;
        }
        Ok(TaskSetup {
            writes,
            records: vec![Self::goal(params)],
            distractors: n,
            answer: None,
        })
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        let pattern = validators::RowPattern::exists("expenses", "items", instance.setup.records[0].clone());
        f64::from(u8::from(
            validators::rows_match(&session.device, &pattern).unwrap_or(false),
        ))
    }

    fn mutations(&self, instance: &TaskInstance) -> Vec<Mutation> {
        let goal = instance.setup.records[0].clone();
        ["name", "amount_cents", "category"]
            .into_iter()
            .map(|f| perturb_rows("expenses", "items", goal.clone(), f))
            .collect()
    }
}

// --------------------------------------------------------------- clock

struct ClockCreateTimer;

impl ClockCreateTimer {
    fn display(instance: &TaskInstance) -> String {
        format!(
            "{:02}:{:02}:{:02}",
            instance.param_int("hours"),
            instance.param_int("minutes"),
            instance.param_int("seconds")
        )
    }
}

fn timer_field_mutation(label: &'static str) -> Mutation {
    Mutation::new(format!("timer {label} changed"), move |s: &mut Session| {
        let obs = s.observe();
        if let Some(e) = obs.find_description(label) {
            crate::screens::dispatch(&mut s.device, &mut s.ui, &AgentAction::click(e.index));
            crate::screens::dispatch(&mut s.device, &mut s.ui, &AgentAction::input_text("1"));
        }
    })
}

impl TaskLogic for ClockCreateTimer {
    fn setup(&self, _params: &Params, _rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        Ok(TaskSetup::default())
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        let want = Self::display(instance);
        f64::from(u8::from(validators::ui_displays(
            &session.scroll_sweep(),
            &[want.as_str()],
        )))
    }

    fn mutations(&self, _instance: &TaskInstance) -> Vec<Mutation> {
        let mut out: Vec<Mutation> = apps::TIMER_FIELDS.iter().map(|f| timer_field_mutation(f)).collect();
        out.push(Mutation::new("timer started", |s: &mut Session| {
            let obs = s.observe();
            if let Some(e) = obs.find_text("Start") {
                crate::screens::dispatch(&mut s.device, &mut s.ui, &AgentAction::click(e.index));
            }
        }));
        out
    }
}

// ------------------------------------------------------ wifi + open app

struct TurnOnWifi;

impl TaskLogic for TurnOnWifi {
    fn setup(&self, _params: &Params, _rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        Ok(TaskSetup {
            writes: vec![Write::set_setting("wifi", SettingValue::Bool(false))],
            ..TaskSetup::default()
        })
    }

    fn evaluate(&self, _instance: &TaskInstance, session: &Session) -> f64 {
        f64::from(u8::from(
            validators::setting_enabled(&session.device, "wifi").unwrap_or(false),
        ))
    }

    fn mutations(&self, _instance: &TaskInstance) -> Vec<Mutation> {
        vec![Mutation::new("wifi off", |s: &mut Session| {
            s.device
                .apply(&Write::set_setting("wifi", SettingValue::Bool(false)))
                .expect("declared setting");
        })]
    }
}

struct OpenApp;

pub fn open_app_choices() -> Vec<&'static str> {
    AppId::LAUNCHABLE
        .iter()
        .filter(|a| **a != AppId::Settings)
        .map(|a| a.display_name())
        .collect()
}

impl TaskLogic for OpenApp {
    fn setup(&self, _params: &Params, _rng: &mut SplitMix64) -> Result<TaskSetup, TaskError> {
        Ok(TaskSetup::default())
    }

    fn evaluate(&self, instance: &TaskInstance, session: &Session) -> f64 {
        f64::from(u8::from(validators::app_launched(
            &session.device,
            instance.param_str("app_name"),
        )))
    }

    fn mutations(&self, instance: &TaskInstance) -> Vec<Mutation> {
        let wanted = instance.param_str("app_name").to_string();
        vec![Mutation::new("different app in front", move |s: &mut Session| {
            let other = if wanted == "Files" { "Clock" } else { "Files" };
            s.device.foreground_app = other.to_string();
        })]
    }
}

// ---------------------------------------------------------------- build

/// Component definitions that are not registered on their own.
pub fn leaf_definition(name: &str) -> Result<TaskDefinition, TaskError> {
    let sentence = || ParamSpec::Sentence;
    match name {
        "SendSms" => TaskDefinition::leaf(
            name,
            "Send a text message to {number} with message: {message}.",
            1,
            TaskKind::TC,
            8,
            vec![("number", ParamSpec::PhoneNumber), ("message", sentence())],
            SendSms,
        ),
        "SimpleCalendarAddEvent" => TaskDefinition::leaf(
            name,
            "In Simple Calendar Pro, create a calendar event on {year}-{month}-{day} at {hour}h with the title '{title}' and the description '{description}'. The event should last for {duration} mins.",
            2,
            TaskKind::TC,
            14,
            vec![
                ("year", ParamSpec::one_of(&["2023"])),
                ("month", ParamSpec::PaddedInt { lo: 10, hi: 11, width: 2 }),
                ("day", ParamSpec::PaddedInt { lo: 1, hi: 28, width: 2 }),
                ("hour", ParamSpec::IntRange { lo: 8, hi: 19 }),
                ("title", ParamSpec::one_of(params::TITLES)),
                ("description", ParamSpec::one_of(params::DESCRIPTIONS)),
                ("duration", ParamSpec::one_of(&DURATIONS)),
            ],
            CalendarAddEvent,
        ),
        "SimpleCalendarDeleteEventsOnRelativeDay" => TaskDefinition::leaf(
            name,
            "In Simple Calendar Pro, delete all events scheduled for this {day_of_week}.",
            2,
            TaskKind::TC,
            9,
            vec![("day_of_week", ParamSpec::one_of(&WEEKDAYS))],
            CalendarDeleteOnRelativeDay,
        ),
        "MarkorCreateNote" => TaskDefinition::leaf(
            name,
            "Create a new note in Markor named {file_name} with the following text: {text}.",
            1,
            TaskKind::TC,
            9,
            vec![("file_name", ParamSpec::FileName { ext: "md" }), ("text", sentence())],
            MarkorCreateNote,
        ),
        "MarkorEditNote" => TaskDefinition::leaf(
            name,
            "Edit {file_name} in Markor. {file_operation}.",
            2,
            TaskKind::TC,
            7,
            vec![
                ("file_name", ParamSpec::FileName { ext: "md" }),
                ("variant", ParamSpec::one_of(&EDIT_VARIANTS)),
                ("text", sentence()),
                ("original", sentence()),
                ("file_operation", ParamSpec::Derived),
                ("expected_content", ParamSpec::Derived),
            ],
            MarkorEditNote,
        ),
        "FilesDeleteFile" => TaskDefinition::leaf(
            name,
            "Delete the file {file_name} from the Android filesystem located in the {subfolder} folder within the sdk_gphone_x86_64 storage area.",
            1,
            TaskKind::TC,
            5,
            vec![
                ("file_name", ParamSpec::FileName { ext: "txt" }),
                ("subfolder", ParamSpec::one_of(&FILE_FOLDERS)),
            ],
            FilesDeleteFile,
        ),
        "ExpenseAddSingle" => TaskDefinition::leaf(
            name,
            "Add the following expenses into pro expense: {expense_csv}",
            2,
            TaskKind::TC,
            11,
            vec![
                ("name", ParamSpec::one_of(params::EXPENSE_NAMES)),
                ("amount_cents", ParamSpec::IntRange { lo: 100, hi: 50_000 }),
                ("category", ParamSpec::one_of(&EXPENSE_CATEGORIES)),
                ("amount", ParamSpec::Derived),
                ("expense_csv", ParamSpec::Derived),
            ],
            ExpenseAddSingle,
        ),
        "ClockCreateTimer" => TaskDefinition::leaf(
            name,
            "Create a timer with {hours} hours, {minutes} minutes, and {seconds} seconds. Do not start the timer.",
            1,
            TaskKind::TC,
            8,
            vec![
                ("hours", ParamSpec::IntRange { lo: 0, hi: 23 }),
                ("minutes", ParamSpec::IntRange { lo: 1, hi: 59 }),
                ("seconds", ParamSpec::IntRange { lo: 0, hi: 59 }),
            ],
            ClockCreateTimer,
        ),
        "TurnOnWifi" => TaskDefinition::leaf(name, "Turn on WiFi.", 1, TaskKind::TC, 3, vec![], TurnOnWifi),
        "OpenApp" => TaskDefinition::leaf(
            name,
            "Open {app_name}.",
            1,
            TaskKind::TC,
            2,
            vec![("app_name", ParamSpec::one_of(&open_app_choices()))],
            OpenApp,
        ),
        _ => Err(TaskError::UnknownTask(name.to_string())),
    }
}

fn identity(def: &TaskDefinition) -> BTreeMap<String, String> {
    def.param_schema.iter().map(|(n, _)| (n.clone(), n.clone())).collect()
}

/// Oracle step counts of the shipped information-retrieval tasks.
pub(crate) fn ir_oracle_steps(name: &str) -> Option<usize> {
    match name {
        "SimpleCalendarEventsOnDate" => Some(4),
        "SportsTrackerActivitiesCountForWeek" => Some(3),
        _ => None,
    }
}

pub(crate) fn build_registry() -> Result<Vec<TaskDefinition>, TaskError> {
    let mut out = Vec::new();
    for name in [
        "SendSms",
        "SimpleCalendarAddEvent",
        "SimpleCalendarDeleteEventsOnRelativeDay",
        "MarkorCreateNote",
        "MarkorEditNote",
        "FilesDeleteFile",
        "ExpenseAddSingle",
        "ClockCreateTimer",
    ] {
        out.push(leaf_definition(name)?);
    }

    let wifi = leaf_definition("TurnOnWifi")?;
    let open = leaf_definition("OpenApp")?;
    let (wm, om) = (identity(&wifi), identity(&open));
    out.push(compose_with(
        "TurnOnWifiAndOpenApp",
        "Turn on WiFi and open {app_name}.",
        vec![(wifi, wm), (open, om)],
    )?);

    let note = leaf_definition("MarkorCreateNote")?;
    let sms = leaf_definition("SendSms")?;
    let nm = identity(&note);
    let sm = BTreeMap::from([
        ("number".to_string(), "number".to_string()),
        ("message".to_string(), "text".to_string()),
    ]);
    out.push(compose_with(
        "MarkorCreateNoteAndSms",
        "Create a new note in Markor named {file_name} with the following text: {text}. Share the entire content of the note with the phone number {number} via SMS.",
        vec![(note, nm), (sms, sm)],
    )?);

    out.extend(crate::ir::shipped_definitions()?);
    Ok(out)
}

/// The shipped catalog: 12 tasks.
pub fn registry() -> Vec<TaskDefinition> {
    super::cached_registry().to_vec()
}

/// Registered task by name.
pub fn find(name: &str) -> Result<TaskDefinition, TaskError> {
    super::cached_registry()
        .iter()
        .find(|d| d.name == name)
        .cloned()
        .ok_or_else(|| TaskError::UnknownTask(name.to_string()))
}
