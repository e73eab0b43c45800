//! Configuration-driven front end for the `wqed` engine.

pub mod config;
pub mod run;

use std::fmt;

/// Exit code for a successful command.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "WQED_WORKERS";

#[derive(Debug, Clone)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERICAL, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: message.into() }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::config(format!("cannot write {}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<wqed::Error> for CliError {
    fn from(e: wqed::Error) -> Self {
        match e {
            wqed::Error::Numerical(m) => Self::numerical(format!("numerical failure: {m}")),
            other => Self::config(other.to_string()),
        }
    }
}
