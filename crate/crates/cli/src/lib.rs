//! Command implementations behind the `twopar` binary.
//!
//! Every command returns a serializable report and embeds a [`RunManifest`]
//! in the files it writes.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod table;

pub use commands::*;
pub use error::{exit, CliError, Result};
pub use manifest::RunManifest;
