//! Building blocks of the `permball` command-line tool: the on-disk count
//! cache, sweep orchestration, figure data, the self-verification suite and
//! the CSV row schemas shared by writers and readers.

pub mod cache;
pub mod error;
pub mod figures;
pub mod lists;
pub mod output;
pub mod schema;
pub mod sweep;
pub mod verify;

pub use error::{CliError, CliResult};

/// Version string written into cache records and sweep metadata.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
