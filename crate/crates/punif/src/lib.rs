//! File formats, gate expressions, reports, the level-set cache and the
//! verification suite behind the `punif` command.

pub mod cache;
pub mod error;
pub mod expr;
pub mod matrix_json;
pub mod report;
pub mod verify;

pub use error::{exit, CliError, Result};
