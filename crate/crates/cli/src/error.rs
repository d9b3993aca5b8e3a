use std::fmt;

use hdmanova::Error;

/// Failure of a CLI run, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input or configuration (exit code 2).
    Input(String),
    /// Data on which the test is undefined (exit code 3).
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Degenerate(m) => write!(f, "degenerate data: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateCoordinate { k, l, j } => CliError::Degenerate(format!(
                "pooled scale of coordinate {} for pair ({}, {}) is zero; use --tau 0 or drop the coordinate",
                j + 1,
                k + 1,
                l + 1
            )),
            e @ Error::NotPsd { .. } => CliError::Degenerate(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
