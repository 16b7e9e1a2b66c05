use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("shape mismatch in {what}: expected {expected}, got {actual}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("age group {group} has no living population but is referenced by contacts")]
    EmptyGroup { group: usize },

    #[error("non-finite derivative at state index {index}")]
    NonFiniteDerivative { index: usize },

    #[error("integration failed on day {day} in age group {group}: {reason}")]
    Integration {
        day: u32,
        group: usize,
        reason: String,
    },

    #[error("district {id}: {source}")]
    District {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("ensemble member {index}: {source}")]
    Member {
        index: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("percentile of an empty sample")]
    EmptySample,
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Field path of the innermost validation failure, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::Invalid { field, .. } => Some(field),
            Error::District { source, .. } | Error::Member { source, .. } => source.field(),
            _ => None,
        }
    }
}
