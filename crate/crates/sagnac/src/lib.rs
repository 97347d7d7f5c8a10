//! Configuration, file formats and subcommands of the `sagnac` pipeline.
//!
//! The numerics live in `sagnac-core`; this crate reads and writes the JSON
//! and CSV documents around them and stamps every output with a provenance
//! record (tool version, SHA-256 of the run configuration, seed).

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod report;

pub use error::{Error, Result};
