//! Command-line front end, configuration and file formats for `fluxfsp-core`.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod model_file;
pub mod output;
pub mod run;
pub mod validate;

pub use error::{CliError, CliResult};
