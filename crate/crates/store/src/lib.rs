//! Persistence for scenario results: the result directory format and its
//! validator, surveillance case-data ingest, the district registry and the
//! store catalog.

pub mod cases;
pub mod catalog;
pub mod error;
pub mod format;
pub mod registry;

pub use catalog::{RunEntry, RunStatus, ScenarioEntry, Store, StoreCatalog};
pub use error::{Result, StoreError};
pub use format::{load_result, save_result, validate_format, ValidationReport, Violation, ViolationKind};
