//! File formats, configuration, parallel drivers and subcommands around `ifm-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod parallel;
pub mod table;

pub use error::{ToolError, ToolResult};
