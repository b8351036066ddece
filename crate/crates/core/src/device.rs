//! Simulated device state: clock, filesystem, per-app record stores and
//! system settings.
//!
//! Everything a reward check needs lives here, so validators inspect the
//! underlying state rather than what happens to be on screen.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate, NaiveTime, TimeZone, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::DeviceError;

/// Launcher pseudo-app that is in the foreground after a reset.
pub const HOME_APP: &str = "Home";

/// Root of shared storage.
pub const STORAGE_ROOT: &str = "/sdcard";

/// Directories present on a pristine device.
pub const HOME_DIRS: &[&str] = &[
    "/sdcard",
    "/sdcard/Documents",
    "/sdcard/Download",
    "/sdcard/Markor",
    "/sdcard/Movies",
    "/sdcard/Music",
    "/sdcard/Pictures",
];

/// The frozen wall clock every episode starts from: 2023-10-15 15:34 UTC.
pub fn reset_clock() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2023, 10, 15, 15, 34, 0)
        .single()
        .expect("valid constant timestamp")
}

/// Kind of value a table column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Str,
    Int,
    Date,
    Time,
    /// Whole minutes.
    Duration,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Str => "string",
            FieldKind::Int => "integer",
            FieldKind::Date => "date",
            FieldKind::Time => "time",
            FieldKind::Duration => "duration",
        })
    }
}

/// A single cell value. Serializes externally tagged, e.g. `{"date":"2023-10-15"}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scalar {
    Str(String),
    Int(i64),
    Date(NaiveDate),
    Time(NaiveTime),
    Duration(i64),
}

impl Scalar {
    pub fn str(value: impl Into<String>) -> Self {
        Scalar::Str(value.into())
    }

    pub fn kind(&self) -> FieldKind {
        match self {
            Scalar::Str(_) => FieldKind::Str,
            Scalar::Int(_) => FieldKind::Int,
            Scalar::Date(_) => FieldKind::Date,
            Scalar::Time(_) => FieldKind::Time,
            Scalar::Duration(_) => FieldKind::Duration,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Scalar::Int(v) | Scalar::Duration(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_date(&self) -> Option<NaiveDate> {
        match self {
            Scalar::Date(d) => Some(*d),
            _ => None,
        }
    }

    /// Parses `text` as a value of `kind`.
    ///
    /// Dates accept `2023-10-15` and `October 15 2023`; times accept `14:05`
    /// and `11:00am`; durations accept `45`, `45 m` and `45 min`.
    pub fn parse(kind: FieldKind, text: &str) -> Option<Scalar> {
        let text = text.trim();
        match kind {
            FieldKind::Str => Some(Scalar::Str(text.to_string())),
            FieldKind::Int => text.parse().ok().map(Scalar::Int),
            FieldKind::Date => NaiveDate::parse_from_str(text, "%Y-%m-%d")
                .or_else(|_| NaiveDate::parse_from_str(text, "%B %d %Y"))
                .or_else(|_| NaiveDate::parse_from_str(text, "%B %d, %Y"))
                .ok()
                .map(Scalar::Date),
            FieldKind::Time => {
                let lower = text.to_ascii_lowercase();
                NaiveTime::parse_from_str(&lower, "%H:%M")
                    .or_else(|_| NaiveTime::parse_from_str(&lower, "%I:%M%p"))
                    .or_else(|_| NaiveTime::parse_from_str(&lower, "%I:%M %p"))
                    .ok()
                    .map(Scalar::Time)
            }
            FieldKind::Duration => {
                let digits = text
                    .trim_end_matches("minutes")
                    .trim_end_matches("mins")
                    .trim_end_matches("min")
                    .trim_end_matches('m')
                    .trim();
                digits.parse().ok().filter(|v: &i64| *v >= 0).map(Scalar::Duration)
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Str(s) => f.write_str(s),
            Scalar::Int(v) | Scalar::Duration(v) => write!(f, "{v}"),
            Scalar::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Scalar::Time(t) => write!(f, "{:02}:{:02}", t.hour(), t.minute()),
        }
    }
}

/// Column layout of one app table.
#[derive(Debug)]
pub struct TableSchema {
    pub app: &'static str,
    pub table: &'static str,
    pub fields: &'static [(&'static str, FieldKind)],
}

impl TableSchema {
    pub fn field_kind(&self, name: &str) -> Option<FieldKind> {
        self.fields.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
    }

    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.app, self.table)
    }
}

pub static SCHEMAS: &[TableSchema] = &[
    TableSchema {
        app: "messaging",
        table: "sms",
        fields: &[
            ("number", FieldKind::Str),
            ("body", FieldKind::Str),
            ("sent_at", FieldKind::Str),
        ],
    },
    TableSchema {
        app: "calendar",
        table: "events",
        fields: &[
            ("title", FieldKind::Str),
            ("description", FieldKind::Str),
            ("start_date", FieldKind::Date),
            ("start_time", FieldKind::Time),
            ("duration_min", FieldKind::Duration),
            ("repeat_rule", FieldKind::Str),
        ],
    },
    TableSchema {
        app: "expenses",
        table: "items",
        fields: &[
            ("name", FieldKind::Str),
            ("amount_cents", FieldKind::Int),
            ("category", FieldKind::Str),
        ],
    },
    TableSchema {
        app: "tasks",
        table: "todos",
        fields: &[
            ("title", FieldKind::Str),
            ("due_date", FieldKind::Date),
            ("priority", FieldKind::Int),
        ],
    },
    TableSchema {
        app: "tracker",
        table: "activities",
        fields: &[
            ("category", FieldKind::Str),
            ("date", FieldKind::Date),
            ("duration_min", FieldKind::Duration),
            ("distance_m", FieldKind::Int),
        ],
    },
];

/// Looks up a declared table.
pub fn table_schema(app: &str, table: &str) -> Result<&'static TableSchema, DeviceError> {
    SCHEMAS
        .iter()
        .find(|s| s.app == app && s.table == table)
        .ok_or_else(|| DeviceError::UnknownTable(format!("{app}.{table}")))
}

/// Looks up a table by its `app.table` name.
pub fn table_schema_qualified(name: &str) -> Result<&'static TableSchema, DeviceError> {
    let (app, table) = name
        .split_once('.')
        .ok_or_else(|| DeviceError::UnknownTable(name.to_string()))?;
    table_schema(app, table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SettingValue {
    Bool(bool),
    Int(i64),
}

impl fmt::Display for SettingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SettingValue::Bool(b) => write!(f, "{b}"),
            SettingValue::Int(v) => write!(f, "{v}"),
        }
    }
}

/// Fixed settings registry with defaults.
pub static SETTINGS: &[(&str, SettingValue)] = &[
    ("bluetooth", SettingValue::Bool(false)),
    ("brightness", SettingValue::Int(128)),
    ("wifi", SettingValue::Bool(false)),
];

pub type Fields = BTreeMap<String, Scalar>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub row_id: u64,
    pub fields: Fields,
}

impl Row {
    pub fn get(&self, field: &str) -> Option<&Scalar> {
        self.fields.get(field)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileNode {
    pub path: String,
    pub content: Vec<u8>,
    pub modified_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Table {
    next_id: u64,
    rows: Vec<Row>,
}

/// Row filter used by queries and deletes.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    All,
    Eq(String, Scalar),
    Ne(String, Scalar),
    Lt(String, Scalar),
    Gt(String, Scalar),
    RowId(u64),
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn eq(field: impl Into<String>, value: Scalar) -> Self {
        Predicate::Eq(field.into(), value)
    }

    /// Conjunction of field equalities.
    pub fn fields_eq(fields: &Fields) -> Self {
        Predicate::And(
            fields
                .iter()
                .map(|(k, v)| Predicate::Eq(k.clone(), v.clone()))
                .collect(),
        )
    }

    pub fn matches(&self, row: &Row) -> bool {
        match self {
            Predicate::All => true,
            Predicate::Eq(f, v) => row.get(f) == Some(v),
            Predicate::Ne(f, v) => row.get(f) != Some(v),
            Predicate::Lt(f, v) => row.get(f).is_some_and(|x| x.kind() == v.kind() && x < v),
            Predicate::Gt(f, v) => row.get(f).is_some_and(|x| x.kind() == v.kind() && x > v),
            Predicate::RowId(id) => row.row_id == *id,
            Predicate::And(ps) => ps.iter().all(|p| p.matches(row)),
            Predicate::Or(ps) => ps.iter().any(|p| p.matches(row)),
            Predicate::Not(p) => !p.matches(row),
        }
    }

    fn check(&self, schema: &TableSchema) -> Result<(), DeviceError> {
        match self {
            Predicate::All | Predicate::RowId(_) => Ok(()),
            Predicate::Eq(f, _) | Predicate::Ne(f, _) | Predicate::Lt(f, _) | Predicate::Gt(f, _) => schema
                .field_kind(f)
                .map(|_| ())
                .ok_or_else(|| DeviceError::UnknownField {
                    table: schema.qualified_name(),
                    field: f.clone(),
                }),
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().try_for_each(|p| p.check(schema)),
            Predicate::Not(p) => p.check(schema),
        }
    }
}

/// A mutation of device state.
#[derive(Debug, Clone, PartialEq)]
pub enum Write {
    PutFile {
        path: String,
        content: Vec<u8>,
    },
    DeleteFile {
        path: String,
    },
    InsertRow {
        app: String,
        table: String,
        fields: Fields,
    },
    DeleteRows {
        app: String,
        table: String,
        predicate: Predicate,
    },
    SetSetting {
        key: String,
        value: SettingValue,
    },
}

impl Write {
    pub fn put_file(path: impl Into<String>, content: impl Into<Vec<u8>>) -> Self {
        Write::PutFile {
            path: path.into(),
            content: content.into(),
        }
    }

    pub fn delete_file(path: impl Into<String>) -> Self {
        Write::DeleteFile { path: path.into() }
    }

    pub fn insert_row(app: &str, table: &str, fields: Fields) -> Self {
        Write::InsertRow {
            app: app.to_string(),
            table: table.to_string(),
            fields,
        }
    }

    pub fn delete_rows(app: &str, table: &str, predicate: Predicate) -> Self {
        Write::DeleteRows {
            app: app.to_string(),
            table: table.to_string(),
            predicate,
        }
    }

    pub fn clear_table(app: &str, table: &str) -> Self {
        Self::delete_rows(app, table, Predicate::All)
    }

    pub fn set_setting(key: &str, value: SettingValue) -> Self {
        Write::SetSetting {
            key: key.to_string(),
            value,
        }
    }
}

/// What a write did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteOutcome {
    pub row_id: Option<u64>,
    pub deleted: usize,
}

/// Normalizes an absolute path: collapses repeated separators, drops `.`
/// components and trailing slashes. Rejects relative paths and `..`.
pub fn normalize_path(path: &str) -> Result<String, DeviceError> {
    if path.is_empty() {
        return Err(DeviceError::InvalidPath("empty path".into()));
    }
    if !path.starts_with('/') {
        return Err(DeviceError::InvalidPath(format!("{path}: not absolute")));
    }
    let mut parts = Vec::new();
    for part in path.split('/') {
        match part {
            "" | "." => {}
            ".." => return Err(DeviceError::InvalidPath(format!("{path}: contains '..'"))),
            p => parts.push(p),
        }
    }
    if parts.is_empty() {
        return Err(DeviceError::InvalidPath(format!("{path}: names the root")));
    }
    Ok(format!("/{}", parts.join("/")))
}

/// Parent directory of a normalized path, or `None` for top-level entries.
pub fn parent_dir(path: &str) -> Option<&str> {
    path.rfind('/').filter(|&i| i > 0).map(|i| &path[..i])
}

/// Final component of a normalized path.
pub fn file_name(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}

/// The full mutable world of one simulated device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceState {
    pub clock: DateTime<Utc>,
    dirs: BTreeSet<String>,
    files: BTreeMap<String, FileNode>,
    stores: BTreeMap<(&'static str, &'static str), Table>,
    settings: BTreeMap<&'static str, SettingValue>,
    pub foreground_app: String,
}

impl Default for DeviceState {
    fn default() -> Self {
        Self::reset()
    }
}

impl DeviceState {
    /// Pristine device: home directories only, empty stores, default settings.
    pub fn reset() -> Self {
        DeviceState {
            clock: reset_clock(),
            dirs: HOME_DIRS.iter().map(|d| d.to_string()).collect(),
            files: BTreeMap::new(),
            stores: SCHEMAS.iter().map(|s| ((s.app, s.table), Table::default())).collect(),
            settings: SETTINGS.iter().copied().collect(),
            foreground_app: HOME_APP.to_string(),
        }
    }

    pub fn apply(&mut self, write: &Write) -> Result<WriteOutcome, DeviceError> {
        match write {
            Write::PutFile { path, content } => {
                let path = normalize_path(path)?;
                if self.dirs.contains(&path) {
                    return Err(DeviceError::InvalidPath(format!("{path}: is a directory")));
                }
                let mut dir = parent_dir(&path);
                while let Some(d) = dir {
                    self.dirs.insert(d.to_string());
                    dir = parent_dir(d);
                }
                let node = FileNode {
                    path: path.clone(),
                    content: content.clone(),
                    modified_at: self.clock,
                };
                self.files.insert(path, node);
                Ok(WriteOutcome::default())
            }
            Write::DeleteFile { path } => {
                let path = normalize_path(path)?;
                let deleted = usize::from(self.files.remove(&path).is_some());
                Ok(WriteOutcome { row_id: None, deleted })
            }
            Write::InsertRow { app, table, fields } => {
                let schema = table_schema(app, table)?;
                for (name, value) in fields {
                    let kind = schema.field_kind(name).ok_or_else(|| DeviceError::UnknownField {
                        table: schema.qualified_name(),
                        field: name.clone(),
                    })?;
                    if kind != value.kind() {
                        return Err(DeviceError::FieldType {
                            table: schema.qualified_name(),
                            field: name.clone(),
                            expected: kind,
                            found: value.kind(),
                        });
                    }
                }
                let store = self.store_mut(schema);
                store.next_id += 1;
                let row_id = store.next_id;
                store.rows.push(Row {
                    row_id,
                    fields: fields.clone(),
                });
                Ok(WriteOutcome {
                    row_id: Some(row_id),
                    deleted: 0,
                })
            }
            Write::DeleteRows { app, table, predicate } => {
                let schema = table_schema(app, table)?;
                predicate.check(schema)?;
                let store = self.store_mut(schema);
                let before = store.rows.len();
                store.rows.retain(|r| !predicate.matches(r));
                Ok(WriteOutcome {
                    row_id: None,
                    deleted: before - store.rows.len(),
                })
            }
            Write::SetSetting { key, value } => {
                let current = self
                    .settings
                    .iter_mut()
                    .find(|(k, _)| **k == key.as_str())
                    .map(|(_, v)| v)
                    .ok_or_else(|| DeviceError::UnknownSetting(key.clone()))?;
                if std::mem::discriminant(current) != std::mem::discriminant(value) {
                    return Err(DeviceError::SettingType(key.clone()));
                }
                *current = *value;
                Ok(WriteOutcome::default())
            }
        }
    }

    /// Applies writes in order, stopping at the first error.
    pub fn apply_all<'a>(&mut self, writes: impl IntoIterator<Item = &'a Write>) -> Result<(), DeviceError> {
        for w in writes {
            self.apply(w)?;
        }
        Ok(())
    }

    fn store_mut(&mut self, schema: &'static TableSchema) -> &mut Table {
        self.stores.entry((schema.app, schema.table)).or_default()
    }

    /// Rows matching `predicate`, ascending by row id.
    pub fn query(&self, app: &str, table: &str, predicate: &Predicate) -> Result<Vec<Row>, DeviceError> {
        let schema = table_schema(app, table)?;
        predicate.check(schema)?;
        Ok(self
            .stores
            .get(&(schema.app, schema.table))
            .map(|t| t.rows.iter().filter(|r| predicate.matches(r)).cloned().collect())
            .unwrap_or_default())
    }

    pub fn file(&self, path: &str) -> Option<&FileNode> {
        normalize_path(path).ok().and_then(|p| self.files.get(&p))
    }

    pub fn files(&self) -> impl Iterator<Item = &FileNode> {
        self.files.values()
    }

    pub fn is_dir(&self, path: &str) -> bool {
        normalize_path(path).is_ok_and(|p| self.dirs.contains(&p))
    }

    /// Immediate subdirectories and files of `dir`, each sorted by name.
    pub fn list_dir(&self, dir: &str) -> (Vec<String>, Vec<String>) {
        let Ok(dir) = normalize_path(dir) else {
            return (Vec::new(), Vec::new());
        };
        let children = |p: &String| parent_dir(p) == Some(dir.as_str());
        let subdirs = self.dirs.iter().filter(|p| children(p)).cloned().collect();
        let files = self.files.keys().filter(|p| children(p)).cloned().collect();
        (subdirs, files)
    }

    pub fn setting(&self, key: &str) -> Result<SettingValue, DeviceError> {
        self.settings
            .get(key)
            .copied()
            .ok_or_else(|| DeviceError::UnknownSetting(key.to_string()))
    }
}

/// Frozen copy of a device state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot(DeviceState);

impl DeviceState {
    pub fn snapshot(&self) -> Snapshot {
        Snapshot(self.clone())
    }
}

impl Snapshot {
    pub fn restore(&self) -> DeviceState {
        self.0.clone()
    }
}

/// Snapshot of [`DeviceState::reset`], built once per process.
pub fn pristine() -> &'static Snapshot {
    static PRISTINE: OnceLock<Snapshot> = OnceLock::new();
    PRISTINE.get_or_init(|| DeviceState::reset().snapshot())
}
