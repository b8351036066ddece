use thiserror::Error;

use crate::device::FieldKind;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DeviceError {
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("table {table} has no field {field}")]
    UnknownField { table: String, field: String },
    #[error("field {table}.{field} expects {expected}, got {found}")]
    FieldType {
        table: String,
        field: String,
        expected: FieldKind,
        found: FieldKind,
    },
    #[error("unknown setting {0}")]
    UnknownSetting(String),
    #[error("setting {0} has a different value type")]
    SettingType(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("row pattern on {0} has no expected fields")]
    EmptyPattern(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TaskError {
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("task definition {name}: {message}")]
    Definition { name: String, message: String },
    #[error("unresolved placeholder {{{placeholder}}} in goal of {name}")]
    UnresolvedPlaceholder { name: String, placeholder: String },
    #[error("initialization failed: {0}")]
    Init(String),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Ir(#[from] IrError),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IrError {
    #[error("task document: {0}")]
    Load(String),
    #[error("task {task}: {message}")]
    Spec { task: String, message: String },
    #[error("task {task}: could not sample a {what} record after {attempts} attempts")]
    Synthesis {
        task: String,
        what: &'static str,
        attempts: usize,
    },
    #[error(transparent)]
    Device(#[from] DeviceError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least one trial")]
    NoTrials,
    #[error("successes {successes} exceed trials {n}")]
    TooManySuccesses { successes: u64, n: u64 },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("session closed")]
    Closed,
}
