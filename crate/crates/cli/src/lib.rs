//! Command-line front end: configuration, engine dispatch and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod output;
pub mod quantity;

use std::fmt;

/// Exit status 1: bad configuration or input.
pub const EXIT_INVALID: u8 = 1;
/// Exit status 2: an integrator or fit failed.
pub const EXIT_NUMERICAL: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
    /// Some acceptance criteria failed.
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_INVALID,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<antipt_core::Error> for CliError {
    fn from(e: antipt_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}
