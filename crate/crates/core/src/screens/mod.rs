//! Virtual app screens rendered as accessibility-style element lists, and
//! the dispatcher that turns agent actions into device mutations.
//!
//! Layout is synthetic: one column of 120 px rows across a 1080x2400
//! screen, at most [`VIEWPORT_ROWS`] rows visible. A vertical scroll moves
//! the viewport by [`SCROLL_STEP`] rows. The expense form's category row is
//! a nested region scrolled with `left`/`right`.

mod action;
pub mod apps;
mod element;

use std::collections::BTreeMap;

pub use action::{ActionError, ActionType, AgentAction, Direction, GoalStatus};
pub use apps::{AppId, EXPENSE_CATEGORIES, NOTES_DIR, VISIBLE_CATEGORIES};
pub use element::{
    BBox, ElementClass, Observation, TransitionResult, UIElement, ROW_HEIGHT, SCREEN_HEIGHT, SCREEN_WIDTH, SCROLL_STEP,
    VIEWPORT_ROWS,
};

use apps::{layout, Binding, Context, CursorMove, Frame, Screen, Widget};

use crate::device::{DeviceState, FieldKind, Fields, Predicate, Scalar, SettingValue, Write};

/// Per-app navigation stacks. Together with [`DeviceState`] this fully
/// determines what is on screen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UiState {
    stacks: BTreeMap<AppId, Vec<Frame>>,
}

impl Default for UiState {
    fn default() -> Self {
        UiState {
            stacks: BTreeMap::from([(AppId::Home, vec![Frame::new(Screen::Launcher)])]),
        }
    }
}

fn current_app(device: &DeviceState) -> AppId {
    AppId::resolve(&device.foreground_app).unwrap_or(AppId::Home)
}

impl UiState {
    fn frame(&self, app: AppId) -> Frame {
        self.stacks
            .get(&app)
            .and_then(|s| s.last())
            .cloned()
            .unwrap_or_else(|| Frame::new(app.home_screen()))
    }

    fn frame_mut(&mut self, app: AppId) -> &mut Frame {
        let stack = self
            .stacks
            .entry(app)
            .or_insert_with(|| vec![Frame::new(app.home_screen())]);
        if stack.is_empty() {
            stack.push(Frame::new(app.home_screen()));
        }
        stack.last_mut().expect("non-empty stack")
    }

    fn launch(&mut self, device: &mut DeviceState, app: AppId) {
        self.stacks.insert(app, vec![Frame::new(app.home_screen())]);
        device.foreground_app = app.display_name().to_string();
    }

    fn go_home(&mut self, device: &mut DeviceState) {
        self.launch(device, AppId::Home);
    }
}

struct Laid {
    rows: Vec<Vec<Widget>>,
    offset: usize,
}

fn max_offset(rows: usize) -> usize {
    rows.saturating_sub(VIEWPORT_ROWS)
}

fn lay_out(frame: &Frame, device: &DeviceState) -> Laid {
    let rows = layout(frame, device);
    let offset = frame.offset.min(max_offset(rows.len()));
    Laid { rows, offset }
}

/// Elements of the visible rows, each with its (row, column) position.
fn visible(laid: &Laid) -> Vec<(UIElement, usize, usize)> {
    let end = (laid.offset + VIEWPORT_ROWS).min(laid.rows.len());
    let mut out = Vec::new();
    for (slot, r) in (laid.offset..end).enumerate() {
        let row = &laid.rows[r];
        let width = SCREEN_WIDTH / row.len().max(1) as i64;
        for (c, w) in row.iter().enumerate() {
            let x_max = if c + 1 == row.len() {
                SCREEN_WIDTH
            } else {
                (c as i64 + 1) * width
            };
            let element = UIElement {
                index: out.len(),
                text: w.text.clone(),
                content_description: w.desc.clone(),
                class_name: w.class,
                bbox: BBox {
                    x_min: c as i64 * width,
                    y_min: slot as i64 * ROW_HEIGHT,
                    x_max,
                    y_max: (slot as i64 + 1) * ROW_HEIGHT,
                },
                is_clickable: w.clickable,
                is_scrollable: w.scrollable,
                is_focused: w.focused,
                is_checked: w.checked,
            };
            out.push((element, r, c));
        }
    }
    out
}

/// Renders the foreground screen.
pub fn render(device: &DeviceState, ui: &UiState) -> Observation {
    let app = current_app(device);
    let frame = ui.frame(app);
    let laid = lay_out(&frame, device);
    Observation {
        foreground_app: app.display_name().to_string(),
        screen_id: frame.screen.id().to_string(),
        elements: visible(&laid).into_iter().map(|(e, _, _)| e).collect(),
        viewport_offset: laid.offset,
    }
}

/// Renders the foreground screen at every vertical scroll position, top to
/// bottom. Horizontal regions keep their current position.
pub fn scroll_sweep(device: &DeviceState, ui: &UiState) -> Vec<Observation> {
    let app = current_app(device);
    let mut frame = ui.frame(app);
    let rows = layout(&frame, device).len();
    let last = max_offset(rows);
    let mut offsets: Vec<usize> = (0..=last).step_by(SCROLL_STEP).collect();
    if offsets.last() != Some(&last) {
        offsets.push(last);
    }
    offsets
        .into_iter()
        .map(|offset| {
            frame.offset = offset;
            let laid = lay_out(&frame, device);
            Observation {
                foreground_app: app.display_name().to_string(),
                screen_id: frame.screen.id().to_string(),
                elements: visible(&laid).into_iter().map(|(e, _, _)| e).collect(),
                viewport_offset: laid.offset,
            }
        })
        .collect()
}

fn char_to_byte(s: &str, chars: usize) -> usize {
    s.char_indices().nth(chars).map_or(s.len(), |(i, _)| i)
}

/// Applies `action` to the foreground screen. Status and answer actions are
/// episode-level and handled by the session; here they are no-ops.
pub(crate) fn dispatch(device: &mut DeviceState, ui: &mut UiState, action: &AgentAction) -> TransitionResult {
    if let Err(e) = action.validate() {
        return TransitionResult::rejected(e.to_string());
    }
    let app = current_app(device);
    match action.action_type {
        ActionType::Click | ActionType::LongPress => {
            let laid = lay_out(&ui.frame(app), device);
            let elements = visible(&laid);
            let hit = match (action.index, action.x, action.y) {
                (Some(i), _, _) => elements.get(i),
                (None, Some(x), Some(y)) => elements.iter().find(|(e, _, _)| e.bbox.contains(x, y)),
                _ => None,
            };
            let Some((element, r, c)) = hit else {
                return TransitionResult::rejected(match action.index {
                    Some(i) => format!("no element at index {i} ({} on screen)", elements.len()),
                    None => "no element at the given coordinates".to_string(),
                });
            };
            let widget = laid.rows[*r][*c].clone();
            let label = element.label().unwrap_or("element").to_string();
            if action.action_type == ActionType::Click {
                click(device, ui, app, widget, &label)
            } else {
                long_press(ui, app, widget, &label)
            }
        }
        ActionType::InputText => input_text(ui, app, action.text.as_deref().unwrap_or_default()),
        ActionType::Scroll => scroll(device, ui, app, action.direction.expect("validated")),
        ActionType::NavigateHome => {
            ui.go_home(device);
            TransitionResult::applied("went to the home screen")
        }
        ActionType::NavigateBack => navigate_back(device, ui, app),
        ActionType::KeyboardEnter => keyboard_enter(ui, app),
        ActionType::OpenApp => {
            let name = action.app_name.as_deref().unwrap_or_default();
            match AppId::resolve(name).filter(|a| *a != AppId::Home) {
                Some(target) => {
                    ui.launch(device, target);
                    TransitionResult::applied(format!("opened {}", target.display_name()))
                }
                None => TransitionResult::rejected(format!("unknown app {name:?}")),
            }
        }
        ActionType::Wait => TransitionResult::applied("waited"),
        ActionType::Unknown => TransitionResult::rejected("unknown action ignored"),
        ActionType::Status | ActionType::Answer => TransitionResult::applied("no screen effect"),
    }
}

fn click(device: &mut DeviceState, ui: &mut UiState, app: AppId, widget: Widget, label: &str) -> TransitionResult {
    let frame = ui.frame_mut(app);
    let on_context_row = matches!(
        widget.binding,
        Binding::DeleteFile(_) | Binding::DeleteEvent(_) | Binding::Cursor(_)
    );
    if !on_context_row {
        frame.context = None;
    }
    match widget.binding {
        Binding::None => TransitionResult::applied(format!("tapped {label}; nothing happened")),
        Binding::Launch(target) => {
            ui.launch(device, target);
            TransitionResult::applied(format!("opened {}", target.display_name()))
        }
        Binding::Toggle(key) => {
            let on = matches!(device.setting(key), Ok(SettingValue::Bool(true)));
            match device.apply(&Write::set_setting(key, SettingValue::Bool(!on))) {
                Ok(_) => TransitionResult::applied(format!("{label} turned {}", if on { "off" } else { "on" })),
                Err(e) => TransitionResult::rejected(e.to_string()),
            }
        }
        Binding::Field(slot) => {
            frame.focus = Some(slot);
            if let Screen::NotesEditor {
                content,
                cursor,
                selected_all,
                ..
            } = &mut frame.screen
            {
                *cursor = content.chars().count();
                *selected_all = false;
            }
            TransitionResult::applied(format!("focused {label}"))
        }
        Binding::Push(screen) => {
            let id = screen.id();
            ui.stacks.entry(app).or_default().push(Frame::new(screen));
            TransitionResult::applied(format!("opened {id}"))
        }
        Binding::Submit => submit(device, ui, app),
        Binding::StartTimer => {
            if let Screen::ClockTimer { running, .. } = &mut frame.screen {
                *running = true;
            }
            TransitionResult::applied("timer started")
        }
        Binding::Category(i) => {
            if let Screen::ExpenseForm { category, .. } = &mut frame.screen {
                *category = Some(i);
            }
            TransitionResult::applied(format!("selected category {label}"))
        }
        Binding::OpenNote(path) => {
            let content = device
                .file(&path)
                .map(|f| String::from_utf8_lossy(&f.content).into_owned())
                .unwrap_or_default();
            let cursor = content.chars().count();
            ui.stacks.entry(app).or_default().push(Frame::new(Screen::NotesEditor {
                path,
                content,
                cursor,
                selected_all: false,
            }));
            TransitionResult::applied(format!("opened note {label}"))
        }
        Binding::Dir(path) => {
            ui.stacks
                .entry(app)
                .or_default()
                .push(Frame::new(Screen::FilesDir { path }));
            TransitionResult::applied(format!("opened folder {label}"))
        }
        Binding::File(_) | Binding::Event(_) => {
            TransitionResult::applied(format!("tapped {label}; long press for actions"))
        }
        Binding::DeleteFile(path) => {
            frame.context = None;
            match device.apply(&Write::delete_file(path.clone())) {
                Ok(_) => TransitionResult::applied(format!("deleted {path}")),
                Err(e) => TransitionResult::rejected(e.to_string()),
            }
        }
        Binding::DeleteEvent(id) => {
            frame.context = None;
            match device.apply(&Write::delete_rows("calendar", "events", Predicate::RowId(id))) {
                Ok(_) => TransitionResult::applied("deleted event"),
                Err(e) => TransitionResult::rejected(e.to_string()),
            }
        }
        Binding::Cursor(mv) => {
            frame.context = None;
            frame.focus = Some(0);
            if let Screen::NotesEditor {
                content,
                cursor,
                selected_all,
                ..
            } = &mut frame.screen
            {
                match mv {
                    CursorMove::Start => {
                        *cursor = 0;
                        *selected_all = false;
                    }
                    CursorMove::End => {
                        *cursor = content.chars().count();
                        *selected_all = false;
                    }
                    CursorMove::SelectAll => *selected_all = true,
                }
            }
            TransitionResult::applied(label.to_string())
        }
    }
}

fn long_press(ui: &mut UiState, app: AppId, widget: Widget, label: &str) -> TransitionResult {
    let frame = ui.frame_mut(app);
    match widget.binding {
        Binding::File(path) => {
            frame.context = Some(Context::File(path));
            TransitionResult::applied(format!("opened actions for {label}"))
        }
        Binding::Event(id) => {
            frame.context = Some(Context::Event(id));
            TransitionResult::applied(format!("opened actions for {label}"))
        }
        Binding::Field(0) if matches!(frame.screen, Screen::NotesEditor { .. }) => {
            frame.focus = Some(0);
            frame.context = Some(Context::Editor);
            TransitionResult::applied("opened text selection actions")
        }
        _ => TransitionResult::applied(format!("long pressed {label}; nothing happened")),
    }
}

fn input_text(ui: &mut UiState, app: AppId, text: &str) -> TransitionResult {
    let frame = ui.frame_mut(app);
    let Some(slot) = frame.focus else {
        return TransitionResult::rejected("no focused text field");
    };
    if let Screen::NotesEditor {
        content,
        cursor,
        selected_all,
        ..
    } = &mut frame.screen
    {
        if *selected_all {
            *content = text.to_string();
            *selected_all = false;
            *cursor = content.chars().count();
        } else {
            let at = char_to_byte(content, *cursor);
            content.insert_str(at, text);
            *cursor += text.chars().count();
        }
        return TransitionResult::applied("typed into note");
    }
    match frame.screen.field_mut(slot) {
        Some(field) => {
            field.push_str(text);
            TransitionResult::applied("typed text")
        }
        None => TransitionResult::rejected("no focused text field"),
    }
}

fn scroll(device: &DeviceState, ui: &mut UiState, app: AppId, direction: Direction) -> TransitionResult {
    let rows = layout(&ui.frame(app), device).len();
    let frame = ui.frame_mut(app);
    match direction {
        Direction::Up | Direction::Down => {
            let last = max_offset(rows);
            let current = frame.offset.min(last);
            let next = if direction == Direction::Down {
                (current + SCROLL_STEP).min(last)
            } else {
                current.saturating_sub(SCROLL_STEP)
            };
            frame.offset = next;
            if next == current {
                TransitionResult::applied("already at the end of the list")
            } else {
                TransitionResult::applied(format!("scrolled {} to row {next}", direction.as_str()))
            }
        }
        Direction::Left | Direction::Right => match &mut frame.screen {
            Screen::ExpenseForm { category_offset, .. } => {
                let last = EXPENSE_CATEGORIES.len() - VISIBLE_CATEGORIES;
                let next = if direction == Direction::Right {
                    (*category_offset + VISIBLE_CATEGORIES).min(last)
                } else {
                    category_offset.saturating_sub(VISIBLE_CATEGORIES)
                };
                let moved = next != *category_offset;
                *category_offset = next;
                TransitionResult::applied(if moved {
                    "scrolled categories"
                } else {
                    "categories already at the end"
                })
            }
            _ => TransitionResult::rejected("nothing scrolls horizontally here"),
        },
    }
}

fn navigate_back(device: &mut DeviceState, ui: &mut UiState, app: AppId) -> TransitionResult {
    if app == AppId::Home {
        return TransitionResult::applied("already home");
    }
    let frame = ui.frame_mut(app);
    if frame.context.take().is_some() {
        return TransitionResult::applied("closed actions");
    }
    let stack = ui.stacks.entry(app).or_default();
    if stack.len() > 1 {
        stack.pop();
        TransitionResult::applied("went back")
    } else {
        ui.go_home(device);
        TransitionResult::applied("went back to the home screen")
    }
}

fn keyboard_enter(ui: &mut UiState, app: AppId) -> TransitionResult {
    let frame = ui.frame_mut(app);
    if frame.focus.is_none() {
        return TransitionResult::applied("enter pressed; no focused field");
    }
    if matches!(frame.screen, Screen::NotesEditor { .. }) {
        return input_text(ui, app, "\n");
    }
    frame.focus = None;
    TransitionResult::applied("field committed")
}

fn sms_timestamp(device: &DeviceState) -> String {
    device.clock.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

fn submit(device: &mut DeviceState, ui: &mut UiState, app: AppId) -> TransitionResult {
    let frame = ui.frame_mut(app);
    let result = match &mut frame.screen {
        Screen::SmsCompose { fields } => {
            let number = fields[0].trim();
            let body = fields[1].trim();
            if number.is_empty() || body.is_empty() {
                return TransitionResult::rejected("phone number and message are required");
            }
            let row = Fields::from([
                ("number".to_string(), Scalar::str(number)),
                ("body".to_string(), Scalar::str(body)),
                ("sent_at".to_string(), Scalar::str(sms_timestamp(device))),
            ]);
            device
                .apply(&Write::insert_row("messaging", "sms", row))
                .map(|_| "message sent")
        }
        Screen::CalendarForm { fields } => {
            let title = fields[0].trim();
            if title.is_empty() {
                return TransitionResult::rejected("title is required");
            }
            let parsed = (
                Scalar::parse(FieldKind::Date, &fields[2]),
                Scalar::parse(FieldKind::Time, &fields[3]),
                Scalar::parse(FieldKind::Duration, &fields[4]),
            );
            let (Some(date), Some(time), Some(duration)) = parsed else {
                return TransitionResult::rejected(
                    "date (YYYY-MM-DD), start time (HH:MM) and duration (minutes) must be valid",
                );
            };
            let row = Fields::from([
                ("title".to_string(), Scalar::str(title)),
                ("description".to_string(), Scalar::str(fields[1].trim())),
                ("start_date".to_string(), date),
                ("start_time".to_string(), time),
                ("duration_min".to_string(), duration),
                ("repeat_rule".to_string(), Scalar::str(fields[5].trim())),
            ]);
            device
                .apply(&Write::insert_row("calendar", "events", row))
                .map(|_| "event saved")
        }
        Screen::ExpenseForm { fields, category, .. } => {
            let name = fields[0].trim();
            let (Some(cents), Some(cat)) = (apps::parse_amount(&fields[1]), *category) else {
                return TransitionResult::rejected("amount and category are required");
            };
            if name.is_empty() {
                return TransitionResult::rejected("name is required");
            }
            let row = Fields::from([
                ("name".to_string(), Scalar::str(name)),
                ("amount_cents".to_string(), Scalar::Int(cents)),
                ("category".to_string(), Scalar::str(EXPENSE_CATEGORIES[cat])),
            ]);
            device
                .apply(&Write::insert_row("expenses", "items", row))
                .map(|_| "expense saved")
        }
        Screen::NotesNameDialog { name } => {
            let name = name.trim().to_string();
            if name.is_empty() || name.contains('/') {
                return TransitionResult::rejected("invalid file name");
            }
            let path = format!("{NOTES_DIR}/{name}");
            let content = match device.file(&path) {
                Some(f) => String::from_utf8_lossy(&f.content).into_owned(),
                None => {
                    if let Err(e) = device.apply(&Write::put_file(path.clone(), Vec::new())) {
                        return TransitionResult::rejected(e.to_string());
                    }
                    String::new()
                }
            };
            let cursor = content.chars().count();
            *frame = Frame::new(Screen::NotesEditor {
                path,
                content,
                cursor,
                selected_all: false,
            });
            return TransitionResult::applied(format!("created {name}"));
        }
        Screen::NotesEditor { path, content, .. } => {
            return match device.apply(&Write::put_file(path.clone(), content.as_bytes().to_vec())) {
                Ok(_) => TransitionResult::applied("note saved"),
                Err(e) => TransitionResult::rejected(e.to_string()),
            };
        }
        _ => return TransitionResult::applied("nothing to submit"),
    };
    match result {
        Ok(note) => {
            if let Some(stack) = ui.stacks.get_mut(&app) {
                if stack.len() > 1 {
                    stack.pop();
                }
            }
            TransitionResult::applied(note)
        }
        Err(e) => TransitionResult::rejected(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open(device: &mut DeviceState, ui: &mut UiState, app: &str) {
        assert!(dispatch(device, ui, &AgentAction::open_app(app)).applied);
    }

    fn tap_text(device: &mut DeviceState, ui: &mut UiState, label: &str) -> TransitionResult {
        let obs = render(device, ui);
        let el = obs
            .elements
            .iter()
            .find(|e| e.text.as_deref() == Some(label) || e.content_description.as_deref() == Some(label))
            .unwrap_or_else(|| panic!("{label} not on screen: {obs:?}"));
        dispatch(device, ui, &AgentAction::click(el.index))
    }

    #[test]
    fn settings_show_wifi_checkbox() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        open(&mut device, &mut ui, "Settings");
        let obs = render(&device, &ui);
        let wifi = obs.find_text("Wi-Fi").unwrap();
        assert_eq!(wifi.class_name, ElementClass::Checkbox);
        assert!(!wifi.is_checked);
        assert!(tap_text(&mut device, &mut ui, "Wi-Fi").applied);
        assert_eq!(device.setting("wifi").unwrap(), SettingValue::Bool(true));
        assert!(render(&device, &ui).find_text("Wi-Fi").unwrap().is_checked);
        assert_eq!(render(&device, &ui), render(&device, &ui));
    }

    #[test]
    fn compose_screen_and_send() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        open(&mut device, &mut ui, "Simple SMS Messenger");
        tap_text(&mut device, &mut ui, "Start chat");
        let obs = render(&device, &ui);
        assert_eq!(obs.screen_id, "messaging/compose");
        let edits = obs
            .elements
            .iter()
            .filter(|e| e.class_name == ElementClass::EditText)
            .count();
        assert_eq!(edits, 2);
        assert!(obs.find_text("Send").is_some());

        let r = dispatch(&mut device, &mut ui, &AgentAction::input_text("x"));
        assert!(!r.applied, "no focus yet");

        tap_text(&mut device, &mut ui, "Phone number");
        dispatch(&mut device, &mut ui, &AgentAction::input_text("+15550123"));
        tap_text(&mut device, &mut ui, "Message");
        dispatch(&mut device, &mut ui, &AgentAction::input_text("hello"));
        let obs = render(&device, &ui);
        assert_eq!(obs.elements.iter().filter(|e| e.is_focused).count(), 1);
        assert!(tap_text(&mut device, &mut ui, "Send").applied);
        let rows = device.query("messaging", "sms", &Predicate::All).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].get("number"), Some(&Scalar::str("+15550123")));
        assert_eq!(rows[0].get("body"), Some(&Scalar::str("hello")));
        assert_eq!(render(&device, &ui).screen_id, "messaging/inbox");
    }

    #[test]
    fn rejections() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        assert!(!dispatch(&mut device, &mut ui, &AgentAction::click(99)).applied);
        assert!(!dispatch(&mut device, &mut ui, &AgentAction::open_app("Chrome")).applied);
        assert!(!dispatch(&mut device, &mut ui, &AgentAction::click_at(5, 2399)).applied);
        assert!(!dispatch(&mut device, &mut ui, &AgentAction::scroll(Direction::Left)).applied);
        assert!(dispatch(&mut device, &mut ui, &AgentAction::wait()).applied);
        assert!(!dispatch(&mut device, &mut ui, &AgentAction::unknown()).applied);
    }

    #[test]
    fn coordinate_click_hits_element() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        let obs = render(&device, &ui);
        let markor = obs.find_text("Markor").unwrap();
        let (x, y) = markor.bbox.center();
        assert!(dispatch(&mut device, &mut ui, &AgentAction::click_at(x, y)).applied);
        assert_eq!(device.foreground_app, "Markor");
    }

    #[test]
    fn back_and_home_navigation() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        open(&mut device, &mut ui, "Messages");
        tap_text(&mut device, &mut ui, "Start chat");
        dispatch(&mut device, &mut ui, &AgentAction::navigate_back());
        assert_eq!(render(&device, &ui).screen_id, "messaging/inbox");
        dispatch(&mut device, &mut ui, &AgentAction::navigate_back());
        assert_eq!(render(&device, &ui).screen_id, "launcher");
        open(&mut device, &mut ui, "Messages");
        dispatch(&mut device, &mut ui, &AgentAction::navigate_home());
        assert_eq!(device.foreground_app, "Home");
    }

    #[test]
    fn long_list_scrolls_and_sweep_covers_everything() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        for i in 0..30 {
            device
                .apply(&Write::put_file(format!("/sdcard/Download/f{i:02}.txt"), "x"))
                .unwrap();
        }
        open(&mut device, &mut ui, "Files");
        tap_text(&mut device, &mut ui, "Download");
        let first = render(&device, &ui);
        assert_eq!(first.elements.len(), VIEWPORT_ROWS);
        assert!(first.find_text("f29.txt").is_none());
        for e in &first.elements {
            assert!(e.bbox.y_max <= SCREEN_HEIGHT && e.bbox.x_max <= SCREEN_WIDTH);
        }
        dispatch(&mut device, &mut ui, &AgentAction::scroll(Direction::Down));
        assert_eq!(render(&device, &ui).viewport_offset, SCROLL_STEP);

        let mut seen: Vec<String> = scroll_sweep(&device, &ui)
            .iter()
            .flat_map(|o| o.elements.iter().filter_map(|e| e.text.clone()))
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 31, "header plus 30 files");
    }

    #[test]
    fn delete_file_through_context_row() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        device.apply(&Write::put_file("/sdcard/Download/a.txt", "x")).unwrap();
        device.apply(&Write::put_file("/sdcard/Download/b.txt", "x")).unwrap();
        open(&mut device, &mut ui, "Files");
        tap_text(&mut device, &mut ui, "Download");
        let obs = render(&device, &ui);
        let a = obs.find_text("a.txt").unwrap().index;
        assert!(obs.find_text("Delete").is_none());
        dispatch(&mut device, &mut ui, &AgentAction::long_press(a));
        let obs = render(&device, &ui);
        let del = obs.find_text("Delete").unwrap();
        assert_eq!(del.index, a + 1);
        dispatch(&mut device, &mut ui, &AgentAction::click(del.index));
        assert!(device.file("/sdcard/Download/a.txt").is_none());
        assert!(device.file("/sdcard/Download/b.txt").is_some());
    }

    #[test]
    fn editor_cursor_modes() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        device.apply(&Write::put_file("/sdcard/Markor/n.md", "body")).unwrap();
        open(&mut device, &mut ui, "Markor");
        tap_text(&mut device, &mut ui, "n.md");
        let body = render(&device, &ui).find_description("Note content").unwrap().index;
        dispatch(&mut device, &mut ui, &AgentAction::long_press(body));
        tap_text(&mut device, &mut ui, "Cursor to start");
        dispatch(&mut device, &mut ui, &AgentAction::input_text("top\n"));
        dispatch(&mut device, &mut ui, &AgentAction::click(body));
        dispatch(&mut device, &mut ui, &AgentAction::input_text("\nend"));
        tap_text(&mut device, &mut ui, "Save");
        assert_eq!(device.file("/sdcard/Markor/n.md").unwrap().content, b"top\nbody\nend");

        dispatch(&mut device, &mut ui, &AgentAction::long_press(body));
        tap_text(&mut device, &mut ui, "Select all");
        dispatch(&mut device, &mut ui, &AgentAction::input_text("new"));
        tap_text(&mut device, &mut ui, "Save");
        assert_eq!(device.file("/sdcard/Markor/n.md").unwrap().content, b"new");
    }

    #[test]
    fn expense_categories_scroll_horizontally() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        open(&mut device, &mut ui, "Pro Expense");
        tap_text(&mut device, &mut ui, "Add expense");
        let obs = render(&device, &ui);
        assert!(obs.find_text("Housing").is_some());
        assert!(obs.find_text("Food").is_none());
        let chips: Vec<_> = obs
            .elements
            .iter()
            .filter(|e| e.bbox.y_min == obs.find_text("Housing").unwrap().bbox.y_min)
            .collect();
        assert_eq!(chips.len(), VISIBLE_CATEGORIES);
        dispatch(&mut device, &mut ui, &AgentAction::scroll(Direction::Right));
        dispatch(&mut device, &mut ui, &AgentAction::scroll(Direction::Right));
        assert!(render(&device, &ui).find_text("Food").is_some());
        tap_text(&mut device, &mut ui, "Name");
        dispatch(&mut device, &mut ui, &AgentAction::input_text("Lunch"));
        tap_text(&mut device, &mut ui, "Amount");
        dispatch(&mut device, &mut ui, &AgentAction::input_text("12.50"));
        tap_text(&mut device, &mut ui, "Food");
        assert!(render(&device, &ui).find_text("Food").unwrap().is_checked);
        assert!(tap_text(&mut device, &mut ui, "Save").applied);
        let rows = device.query("expenses", "items", &Predicate::All).unwrap();
        assert_eq!(rows[0].get("amount_cents"), Some(&Scalar::Int(1250)));
        assert_eq!(rows[0].get("category"), Some(&Scalar::str("Food")));
    }

    #[test]
    fn calendar_form_rejects_bad_date() {
        let mut device = DeviceState::reset();
        let mut ui = UiState::default();
        open(&mut device, &mut ui, "Simple Calendar Pro");
        tap_text(&mut device, &mut ui, "New event");
        tap_text(&mut device, &mut ui, "Title");
        dispatch(&mut device, &mut ui, &AgentAction::input_text("Sync"));
        tap_text(&mut device, &mut ui, "Date");
        dispatch(&mut device, &mut ui, &AgentAction::input_text("tomorrow"));
        assert!(!tap_text(&mut device, &mut ui, "Save").applied);
        assert!(device.query("calendar", "events", &Predicate::All).unwrap().is_empty());
    }
}
