use std::path::Path;

use thiserror::Error;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A file failed to parse or violated an input invariant.
    #[error("{file}: {message}")]
    Input { file: String, message: String },
    /// The configuration is missing a required key or holds an invalid value.
    #[error("configuration: {0}")]
    Config(String),
    /// The numerical layer rejected the computation.
    #[error("numeric failure: {0}")]
    Numeric(fdpvar_core::Error),
    /// Writing a report failed.
    #[error("{file}: {message}")]
    Output { file: String, message: String },
    /// A property check found counterexamples.
    #[error("{0} property violation(s)")]
    Violation(usize),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

impl CliError {
    pub fn input(file: &Path, message: impl Into<String>) -> Self {
        CliError::Input { file: file.display().to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Config(_) | CliError::Output { .. } => EXIT_INPUT,
            CliError::Numeric(e) if is_input_error(e) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Violation(_) => EXIT_VIOLATION,
        }
    }
}

/// Core errors that describe bad arguments rather than numerical breakdown.
fn is_input_error(e: &fdpvar_core::Error) -> bool {
    use fdpvar_core::Error as E;
    matches!(
        e,
        E::Domain(_)
            | E::DimensionMismatch { .. }
            | E::InvalidCorrelation(_)
            | E::GridTooSmall { .. }
            | E::UnsupportedDimension { .. }
    )
}

impl From<fdpvar_core::Error> for CliError {
    fn from(e: fdpvar_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
