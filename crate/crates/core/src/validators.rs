//! State-grounded success predicates shared by tasks. All of them are pure
//! reads of the device or of rendered observations.

use serde::{Deserialize, Serialize};

use crate::device::{table_schema, DeviceState, Fields, Predicate, Scalar, SettingValue};
use crate::error::DeviceError;
use crate::screens::Observation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowMode {
    Exists,
    Absent,
}

/// Expected field values for a row in one table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowPattern {
    pub app: String,
    pub table: String,
    pub expected_fields: Fields,
    pub mode: RowMode,
}

impl RowPattern {
    pub fn exists(app: &str, table: &str, expected_fields: Fields) -> Self {
        RowPattern {
            app: app.to_string(),
            table: table.to_string(),
            expected_fields,
            mode: RowMode::Exists,
        }
    }

    pub fn absent(app: &str, table: &str, expected_fields: Fields) -> Self {
        RowPattern {
            mode: RowMode::Absent,
            ..Self::exists(app, table, expected_fields)
        }
    }
}

fn strip_one_newline(bytes: &[u8]) -> &[u8] {
    bytes.strip_suffix(b"\n").unwrap_or(bytes)
}

/// True if `path` exists and, when given, its content equals `expected`
/// after dropping one trailing newline from each side.
pub fn file_exists(state: &DeviceState, path: &str, expected: Option<&[u8]>) -> bool {
    match (state.file(path), expected) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(f), Some(want)) => strip_one_newline(&f.content) == strip_one_newline(want),
    }
}

/// Exists mode: some row carries all expected fields. Absent mode: none does.
/// A pattern without fields is an error rather than "any row".
pub fn rows_match(state: &DeviceState, pattern: &RowPattern) -> Result<bool, DeviceError> {
    let schema = table_schema(&pattern.app, &pattern.table)?;
    if pattern.expected_fields.is_empty() {
        return Err(DeviceError::EmptyPattern(schema.qualified_name()));
    }
    let found = !state
        .query(
            &pattern.app,
            &pattern.table,
            &Predicate::fields_eq(&pattern.expected_fields),
        )?
        .is_empty();
    Ok(match pattern.mode {
        RowMode::Exists => found,
        RowMode::Absent => !found,
    })
}

/// Last ten digits of a phone number.
pub fn normalize_number(number: &str) -> String {
    let digits: Vec<char> = number.chars().filter(char::is_ascii_digit).collect();
    digits[digits.len().saturating_sub(10)..].iter().collect()
}

pub fn normalize_body(body: &str) -> String {
    body.trim().to_lowercase()
}

/// A sent message to `number` with `body`, comparing the last ten digits of
/// the number and the trimmed, lowercased body.
pub fn message_exists(state: &DeviceState, number: &str, body: &str) -> bool {
    let number = normalize_number(number);
    let body = normalize_body(body);
    state
        .query("messaging", "sms", &Predicate::All)
        .unwrap_or_default()
        .iter()
        .any(|row| {
            let n = row.get("number").and_then(Scalar::as_str).map(normalize_number);
            let b = row.get("body").and_then(Scalar::as_str).map(normalize_body);
            n.as_deref() == Some(number.as_str()) && b.as_deref() == Some(body.as_str())
        })
}

/// `rows_match` over calendar events with every event field given.
pub fn event_exists(state: &DeviceState, event: &Fields) -> Result<bool, DeviceError> {
    rows_match(state, &RowPattern::exists("calendar", "events", event.clone()))
}

/// Every required text is the text of some element across the sweep.
pub fn ui_displays(sweep: &[Observation], required: &[&str]) -> bool {
    required.iter().all(|want| {
        sweep
            .iter()
            .flat_map(|o| &o.elements)
            .any(|e| e.text.as_deref() == Some(*want))
    })
}

pub fn setting_enabled(state: &DeviceState, key: &str) -> Result<bool, DeviceError> {
    match state.setting(key)? {
        SettingValue::Bool(b) => Ok(b),
        SettingValue::Int(_) => Err(DeviceError::SettingType(key.to_string())),
    }
}

pub fn app_launched(state: &DeviceState, app_name: &str) -> bool {
    match crate::screens::AppId::resolve(app_name) {
        Some(app) => state.foreground_app == app.display_name(),
        None => false,
    }
}
