use std::path::PathBuf;

use thiserror::Error;

use crate::format::Violation;

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Json { path: PathBuf, message: String },

    /// The result directory does not follow the format (e.g. missing metadata).
    #[error("format error: {0}")]
    Format(String),

    #[error("length mismatch: expected {expected} {what}, found {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("validation failed: {}", first_message(.0))]
    Validation(Vec<Violation>),

    #[error("case data: {0}")]
    CaseData(String),

    #[error("initialization failed for district {district}, group {group}: {reason}")]
    Initialization {
        district: String,
        group: String,
        reason: String,
    },

    #[error("query too short")]
    QueryTooShort,

    #[error("{kind} '{id}' not found")]
    NotFound { kind: &'static str, id: String },

    #[error(transparent)]
    Model(#[from] esid_core::Error),
}

fn first_message(v: &[Violation]) -> String {
    match v {
        [] => "no violations".into(),
        [one] => one.to_string(),
        [first, rest @ ..] => format!("{first} (and {} more)", rest.len()),
    }
}

impl StoreError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        StoreError::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        StoreError::Json { path: path.into(), message: e.to_string() }
    }
}
