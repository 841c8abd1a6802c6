//! Run configuration, snapshot files and CSV outputs.

pub mod config;
pub mod csv;
pub mod snapshot;

pub use config::RunConfig;
pub use snapshot::{FieldId, SnapshotHeader};
