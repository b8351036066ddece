//! Per-app screen models. Each screen lays itself out as rows of widgets;
//! widgets carry a binding that says what a tap or long press does.

use chrono::NaiveDate;

use super::element::ElementClass;
use crate::device::{file_name, DeviceState, Predicate, Scalar, SettingValue, STORAGE_ROOT};

/// Directory the notes app keeps its files in.
pub const NOTES_DIR: &str = "/sdcard/Markor";

/// Expense categories in on-screen order.
pub const EXPENSE_CATEGORIES: [&str; 10] = [
    "Housing",
    "Income",
    "Social",
    "Transportation",
    "Entertainment",
    "Health",
    "Utilities",
    "Education",
    "Food",
    "Other",
];

/// Category chips visible at once in the expense form.
pub const VISIBLE_CATEGORIES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AppId {
    Home,
    Settings,
    Messaging,
    Calendar,
    Markor,
    Files,
    Expenses,
    Clock,
    Tracker,
}

impl AppId {
    /// Apps reachable through `open_app`, in launcher order.
    pub const LAUNCHABLE: [AppId; 8] = [
        AppId::Settings,
        AppId::Messaging,
        AppId::Calendar,
        AppId::Markor,
        AppId::Files,
        AppId::Expenses,
        AppId::Clock,
        AppId::Tracker,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            AppId::Home => "Home",
            AppId::Settings => "Settings",
            AppId::Messaging => "Simple SMS Messenger",
            AppId::Calendar => "Simple Calendar Pro",
            AppId::Markor => "Markor",
            AppId::Files => "Files",
            AppId::Expenses => "Pro Expense",
            AppId::Clock => "Clock",
            AppId::Tracker => "OpenTracks",
        }
    }

    fn aliases(self) -> &'static [&'static str] {
        match self {
            AppId::Home => &["home", "launcher"],
            AppId::Settings => &["settings"],
            AppId::Messaging => &["messages", "messaging", "sms", "simple sms messenger"],
            AppId::Calendar => &["calendar", "simple calendar pro", "simple calendar"],
            AppId::Markor => &["markor", "notes"],
            AppId::Files => &["files", "file manager"],
            AppId::Expenses => &["pro expense", "expense", "expenses"],
            AppId::Clock => &["clock", "timer"],
            AppId::Tracker => &["opentracks", "open tracks", "tracker"],
        }
    }

    /// Case-insensitive lookup by display name or alias.
    pub fn resolve(name: &str) -> Option<AppId> {
        let wanted = name.trim().to_lowercase();
        [AppId::Home]
            .into_iter()
            .chain(Self::LAUNCHABLE)
            .find(|app| app.display_name().to_lowercase() == wanted || app.aliases().contains(&wanted.as_str()))
    }

    pub(crate) fn home_screen(self) -> Screen {
        match self {
            AppId::Home => Screen::Launcher,
            AppId::Settings => Screen::Settings,
            AppId::Messaging => Screen::SmsInbox,
            AppId::Calendar => Screen::CalendarAgenda,
            AppId::Markor => Screen::NotesList,
            AppId::Files => Screen::FilesDir {
                path: STORAGE_ROOT.to_string(),
            },
            AppId::Expenses => Screen::ExpenseList,
            AppId::Clock => Screen::ClockTimer {
                fields: Default::default(),
                running: false,
            },
            AppId::Tracker => Screen::TrackerList,
        }
    }
}

pub const SMS_FIELDS: [&str; 2] = ["Phone number", "Message"];
pub const EVENT_FIELDS: [&str; 6] = [
    "Title",
    "Description",
    "Date",
    "Start time",
    "Duration (minutes)",
    "Repeat",
];
pub const EXPENSE_FIELDS: [&str; 2] = ["Name", "Amount"];
pub const TIMER_FIELDS: [&str; 3] = ["Hours", "Minutes", "Seconds"];
pub const NOTE_BODY: &str = "Note content";
pub const NOTE_NAME_FIELD: &str = "File name";

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Screen {
    Launcher,
    Settings,
    SmsInbox,
    SmsCompose {
        fields: [String; 2],
    },
    CalendarAgenda,
    CalendarDay {
        date: NaiveDate,
    },
    CalendarForm {
        fields: [String; 6],
    },
    NotesList,
    NotesNameDialog {
        name: String,
    },
    NotesEditor {
        path: String,
        content: String,
        /// Cursor position in characters.
        cursor: usize,
        selected_all: bool,
    },
    FilesDir {
        path: String,
    },
    ExpenseList,
    ExpenseForm {
        fields: [String; 2],
        category: Option<usize>,
        category_offset: usize,
    },
    ClockTimer {
        fields: [String; 3],
        running: bool,
    },
    TrackerList,
}

impl Screen {
    pub(crate) fn id(&self) -> &'static str {
        match self {
            Screen::Launcher => "launcher",
            Screen::Settings => "settings",
            Screen::SmsInbox => "messaging/inbox",
            Screen::SmsCompose { .. } => "messaging/compose",
            Screen::CalendarAgenda => "calendar/agenda",
            Screen::CalendarDay { .. } => "calendar/day",
            Screen::CalendarForm { .. } => "calendar/event_form",
            Screen::NotesList => "markor/files",
            Screen::NotesNameDialog { .. } => "markor/name_dialog",
            Screen::NotesEditor { .. } => "markor/editor",
            Screen::FilesDir { .. } => "files/browser",
            Screen::ExpenseList => "expenses/list",
            Screen::ExpenseForm { .. } => "expenses/add_form",
            Screen::ClockTimer { .. } => "clock/timer",
            Screen::TrackerList => "tracker/activities",
        }
    }

    /// Mutable text of a plain form field.
    pub(crate) fn field_mut(&mut self, slot: usize) -> Option<&mut String> {
        match self {
            Screen::SmsCompose { fields } => fields.get_mut(slot),
            Screen::CalendarForm { fields } => fields.get_mut(slot),
            Screen::ExpenseForm { fields, .. } => fields.get_mut(slot),
            Screen::ClockTimer { fields, .. } => fields.get_mut(slot),
            Screen::NotesNameDialog { name } if slot == 0 => Some(name),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CursorMove {
    Start,
    End,
    SelectAll,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Binding {
    None,
    Launch(AppId),
    Toggle(&'static str),
    Field(usize),
    Push(Screen),
    Submit,
    StartTimer,
    Category(usize),
    OpenNote(String),
    Dir(String),
    File(String),
    Event(u64),
    DeleteFile(String),
    DeleteEvent(u64),
    Cursor(CursorMove),
}

/// Open contextual action row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Context {
    File(String),
    Event(u64),
    Editor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Frame {
    pub screen: Screen,
    pub offset: usize,
    pub focus: Option<usize>,
    pub context: Option<Context>,
}

impl Frame {
    pub(crate) fn new(screen: Screen) -> Self {
        Frame {
            screen,
            offset: 0,
            focus: None,
            context: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Widget {
    pub class: ElementClass,
    pub text: Option<String>,
    pub desc: Option<String>,
    pub clickable: bool,
    pub scrollable: bool,
    pub checked: bool,
    pub focused: bool,
    pub binding: Binding,
}

impl Widget {
    fn new(class: ElementClass) -> Self {
        Widget {
            class,
            text: None,
            desc: None,
            clickable: false,
            scrollable: false,
            checked: false,
            focused: false,
            binding: Binding::None,
        }
    }

    fn label(text: impl Into<String>) -> Self {
        Widget {
            text: Some(text.into()),
            ..Self::new(ElementClass::TextView)
        }
    }

    fn described(mut self, desc: impl Into<String>) -> Self {
        self.desc = Some(desc.into());
        self
    }

    fn button(text: impl Into<String>, binding: Binding) -> Self {
        Widget {
            text: Some(text.into()),
            clickable: true,
            binding,
            ..Self::new(ElementClass::Button)
        }
    }

    fn icon(desc: impl Into<String>, binding: Binding) -> Self {
        Widget {
            desc: Some(desc.into()),
            clickable: true,
            binding,
            ..Self::new(ElementClass::ImageButton)
        }
    }

    fn item(text: impl Into<String>, desc: impl Into<String>, binding: Binding) -> Self {
        let clickable = binding != Binding::None;
        Widget {
            text: Some(text.into()),
            desc: Some(desc.into()),
            clickable,
            binding,
            ..Self::new(ElementClass::ListItem)
        }
    }

    fn field(label: &str, value: &str, slot: usize, focus: Option<usize>) -> Self {
        Widget {
            text: (!value.is_empty()).then(|| value.to_string()),
            desc: Some(label.to_string()),
            clickable: true,
            focused: focus == Some(slot),
            binding: Binding::Field(slot),
            ..Self::new(ElementClass::EditText)
        }
    }
}

/// Label used for a calendar day, e.g. "Monday, October 16".
pub fn day_label(date: NaiveDate) -> String {
    date.format("%A, %B %-d").to_string()
}

/// "$12.50" style amount.
pub fn format_cents(cents: i64) -> String {
    let sign = if cents < 0 { "-" } else { "" };
    format!("{sign}${}.{:02}", cents.abs() / 100, cents.abs() % 100)
}

/// Parses "12.50", "$12.5" or "12" into cents.
pub fn parse_amount(text: &str) -> Option<i64> {
    let t = text.trim().trim_start_matches('$');
    let (whole, frac) = match t.split_once('.') {
        Some((w, f)) => (w, f),
        None => (t, ""),
    };
    if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 2 {
        return None;
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let whole: i64 = whole.parse().ok()?;
    let frac: i64 = match frac.len() {
        0 => 0,
        1 => frac.parse::<i64>().ok()? * 10,
        _ => frac.parse().ok()?,
    };
    Some(whole * 100 + frac)
}

/// Text shown by the timer display for the given field values.
pub fn timer_display(fields: &[String; 3]) -> String {
    let parsed: Option<Vec<u32>> = fields
        .iter()
        .map(|f| {
            let f = f.trim();
            if f.is_empty() {
                Some(0)
            } else {
                f.parse().ok()
            }
        })
        .collect();
    match parsed {
        Some(v) => format!("{:02}:{:02}:{:02}", v[0], v[1], v[2]),
        None => "--:--:--".to_string(),
    }
}

fn events_on(device: &DeviceState, date: NaiveDate) -> Vec<crate::device::Row> {
    let mut rows = device
        .query("calendar", "events", &Predicate::eq("start_date", Scalar::Date(date)))
        .unwrap_or_default();
    rows.sort_by(|a, b| (a.get("start_time"), a.row_id).cmp(&(b.get("start_time"), b.row_id)));
    rows
}

fn text_of(row: &crate::device::Row, field: &str) -> String {
    row.get(field).map(|s| s.to_string()).unwrap_or_default()
}

/// Lays out `frame` as rows of widgets, including any open context row.
pub(crate) fn layout(frame: &Frame, device: &DeviceState) -> Vec<Vec<Widget>> {
    let focus = frame.focus;
    let mut rows: Vec<Vec<Widget>> = Vec::new();
    let mut push = |w: Widget| rows.push(vec![w]);
    match &frame.screen {
        Screen::Launcher => {
            push(Widget::label(device.clock.format("%H:%M").to_string()).described("Clock"));
            push(Widget::label(device.clock.format("%A, %B %-d").to_string()));
            for app in AppId::LAUNCHABLE {
                push(Widget {
                    text: Some(app.display_name().to_string()),
                    desc: Some(app.display_name().to_string()),
                    clickable: true,
                    binding: Binding::Launch(app),
                    ..Widget::new(ElementClass::ImageButton)
                });
            }
        }
        Screen::Settings => {
            push(Widget::label("Settings"));
            for (key, label) in [("wifi", "Wi-Fi"), ("bluetooth", "Bluetooth")] {
                let on = matches!(device.setting(key), Ok(SettingValue::Bool(true)));
                push(Widget {
                    text: Some(label.to_string()),
                    clickable: true,
                    checked: on,
                    binding: Binding::Toggle(key),
                    ..Widget::new(ElementClass::Checkbox)
                });
            }
            let brightness = device.setting("brightness").map(|v| v.to_string()).unwrap_or_default();
            push(Widget::label("Brightness").described(brightness));
        }
        Screen::SmsInbox => {
            push(Widget::label("Messages"));
            push(Widget::icon(
                "Start chat",
                Binding::Push(Screen::SmsCompose {
                    fields: Default::default(),
                }),
            ));
            for row in device.query("messaging", "sms", &Predicate::All).unwrap_or_default() {
                push(Widget::item(
                    text_of(&row, "number"),
                    text_of(&row, "body"),
                    Binding::None,
                ));
            }
        }
        Screen::SmsCompose { fields } => {
            push(Widget::label("New conversation"));
            for (slot, label) in SMS_FIELDS.iter().enumerate() {
                push(Widget::field(label, &fields[slot], slot, focus));
            }
            push(Widget::button("Send", Binding::Submit));
        }
        Screen::CalendarAgenda => {
            push(Widget::label(device.clock.format("%B %Y").to_string()));
            push(Widget::icon(
                "New event",
                Binding::Push(Screen::CalendarForm {
                    fields: Default::default(),
                }),
            ));
            let mut dates: Vec<NaiveDate> = device
                .query("calendar", "events", &Predicate::All)
                .unwrap_or_default()
                .iter()
                .filter_map(|r| r.get("start_date").and_then(Scalar::as_date))
                .collect();
            dates.sort();
            dates.dedup();
            for date in dates {
                let n = events_on(device, date).len();
                let desc = if n == 1 {
                    "1 event".to_string()
                } else {
                    format!("{n} events")
                };
                push(Widget::item(
                    day_label(date),
                    desc,
                    Binding::Push(Screen::CalendarDay { date }),
                ));
            }
        }
        Screen::CalendarDay { date } => {
            push(Widget::label(date.format("%A, %B %-d, %Y").to_string()));
            let events = events_on(device, *date);
            if events.is_empty() {
                push(Widget::label("No events"));
            }
            for row in events {
                let desc = format!("{}, {} min", text_of(&row, "start_time"), text_of(&row, "duration_min"));
                push(Widget::item(text_of(&row, "title"), desc, Binding::Event(row.row_id)));
            }
        }
        Screen::CalendarForm { fields } => {
            push(Widget::label("New event"));
            for (slot, label) in EVENT_FIELDS.iter().enumerate() {
                push(Widget::field(label, &fields[slot], slot, focus));
            }
            push(Widget::button("Save", Binding::Submit));
        }
        Screen::NotesList => {
            push(Widget::label("Markor"));
            push(Widget::icon(
                "Create new file",
                Binding::Push(Screen::NotesNameDialog { name: String::new() }),
            ));
            let (_, files) = device.list_dir(NOTES_DIR);
            for path in files {
                push(Widget::item(file_name(&path), "File", Binding::OpenNote(path.clone())));
            }
        }
        Screen::NotesNameDialog { name } => {
            push(Widget::label("New file"));
            push(Widget::field(NOTE_NAME_FIELD, name, 0, focus));
            push(Widget::button("OK", Binding::Submit));
        }
        Screen::NotesEditor { path, content, .. } => {
            push(Widget::label(file_name(path)));
            push(Widget::field(NOTE_BODY, content, 0, focus));
            push(Widget::button("Save", Binding::Submit));
        }
        Screen::FilesDir { path } => {
            push(Widget::label(path.clone()));
            let (dirs, files) = device.list_dir(path);
            for d in dirs {
                push(Widget::item(file_name(&d), "Folder", Binding::Dir(d.clone())));
            }
            for f in files {
                push(Widget::item(file_name(&f), "File", Binding::File(f.clone())));
            }
        }
        Screen::ExpenseList => {
            push(Widget::label("Pro Expense"));
            push(Widget::icon(
                "Add expense",
                Binding::Push(Screen::ExpenseForm {
                    fields: Default::default(),
                    category: None,
                    category_offset: 0,
                }),
            ));
            for row in device.query("expenses", "items", &Predicate::All).unwrap_or_default() {
                let cents = row.get("amount_cents").and_then(Scalar::as_int).unwrap_or(0);
                let desc = format!("{} · {}", format_cents(cents), text_of(&row, "category"));
                push(Widget::item(text_of(&row, "name"), desc, Binding::None));
            }
        }
        Screen::ExpenseForm {
            fields,
            category,
            category_offset,
        } => {
            push(Widget::label("Add expense"));
            for (slot, label) in EXPENSE_FIELDS.iter().enumerate() {
                push(Widget::field(label, &fields[slot], slot, focus));
            }
            push(Widget {
                scrollable: true,
                ..Widget::label("Category")
            });
            let end = (category_offset + VISIBLE_CATEGORIES).min(EXPENSE_CATEGORIES.len());
            let chips = (*category_offset..end)
                .map(|i| Widget {
                    checked: *category == Some(i),
                    ..Widget::button(EXPENSE_CATEGORIES[i], Binding::Category(i))
                })
                .collect();
            rows.push(chips);
            rows.push(vec![Widget::button("Save", Binding::Submit)]);
        }
        Screen::ClockTimer { fields, running } => {
            push(Widget::label("Timer"));
            let display = timer_display(fields);
            let display = if *running {
                format!("Running {display}")
            } else {
                display
            };
            push(Widget::label(display).described("Timer display"));
            for (slot, label) in TIMER_FIELDS.iter().enumerate() {
                push(Widget::field(label, &fields[slot], slot, focus));
            }
            push(Widget::button("Start", Binding::StartTimer));
        }
        Screen::TrackerList => {
            push(Widget::label("OpenTracks"));
            let mut rows_ = device
                .query("tracker", "activities", &Predicate::All)
                .unwrap_or_default();
            rows_.sort_by(|a, b| (b.get("date"), a.row_id).cmp(&(a.get("date"), b.row_id)));
            for row in rows_ {
                let date = row
                    .get("date")
                    .and_then(Scalar::as_date)
                    .map(day_label)
                    .unwrap_or_default();
                let desc = format!(
                    "{date} · {} min · {} m",
                    text_of(&row, "duration_min"),
                    text_of(&row, "distance_m")
                );
                push(Widget::item(text_of(&row, "category"), desc, Binding::None));
            }
        }
    }
    insert_context_row(frame, &mut rows);
    rows
}

fn insert_context_row(frame: &Frame, rows: &mut Vec<Vec<Widget>>) {
    let Some(ctx) = &frame.context else { return };
    let (anchor, row): (Binding, Vec<Widget>) = match ctx {
        Context::File(path) => (
            Binding::File(path.clone()),
            vec![Widget::button("Delete", Binding::DeleteFile(path.clone()))],
        ),
        Context::Event(id) => (
            Binding::Event(*id),
            vec![Widget::button("Delete", Binding::DeleteEvent(*id))],
        ),
        Context::Editor => (
            Binding::Field(0),
            vec![
                Widget::button("Cursor to start", Binding::Cursor(CursorMove::Start)),
                Widget::button("Cursor to end", Binding::Cursor(CursorMove::End)),
                Widget::button("Select all", Binding::Cursor(CursorMove::SelectAll)),
            ],
        ),
    };
    if let Some(pos) = rows.iter().position(|r| r.iter().any(|w| w.binding == anchor)) {
        rows.insert(pos + 1, row);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn app_resolution() {
        assert_eq!(AppId::resolve("markor"), Some(AppId::Markor));
        assert_eq!(AppId::resolve("Simple SMS Messenger"), Some(AppId::Messaging));
        assert_eq!(AppId::resolve(" Pro Expense "), Some(AppId::Expenses));
        assert_eq!(AppId::resolve("Chrome"), None);
    }

    #[test]
    fn amounts() {
        assert_eq!(parse_amount("12.50"), Some(1250));
        assert_eq!(parse_amount("$12.5"), Some(1250));
        assert_eq!(parse_amount("7"), Some(700));
        assert_eq!(parse_amount("1.234"), None);
        assert_eq!(parse_amount("abc"), None);
        assert_eq!(parse_amount(""), None);
        assert_eq!(format_cents(1250), "$12.50");
        assert_eq!(format_cents(5), "$0.05");
    }

    #[test]
    fn timer_text() {
        let f = ["1".to_string(), "30".to_string(), String::new()];
        assert_eq!(timer_display(&f), "01:30:00");
        let f = ["x".to_string(), String::new(), String::new()];
        assert_eq!(timer_display(&f), "--:--:--");
    }

    #[test]
    fn labels() {
        let d = NaiveDate::from_ymd_opt(2023, 10, 16).unwrap();
        assert_eq!(day_label(d), "Monday, October 16");
    }
}
