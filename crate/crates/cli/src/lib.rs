//! Command-line pipelines over `mlood-core`: generate a synthetic task,
//! train, score, tune, evaluate, and benchmark every method in one run.

pub mod args;
pub mod commands;
pub mod error;
pub mod settings;

pub use args::Cli;
pub use commands::run;
pub use error::{CliError, CliResult};
