//! Experiment runner for the `dtuq` library: configuration, deterministic
//! parallel execution and CSV / JSON / SVG output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

pub use commands::{execute, run_and_write, Artifacts};
pub use config::{Command, RunConfig, Settings};
pub use error::{CliError, CliResult};
