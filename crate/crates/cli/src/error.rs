use std::fmt;

use ppg_rocket::Error as CoreError;

/// Failure category; each maps to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Model,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Model => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::Model => "model",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl fmt::Display for CliError {
    /// Always a single line: `error[kind]: message`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = self.message.replace(['\n', '\r'], " ");
        write!(f, "error[{}]: {}", self.kind.as_str(), msg)
    }
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Config, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Data, message: message.into() }
    }

    pub fn model(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Model, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a category and context to core errors.
pub trait Context<T> {
    fn data_err(self, ctx: &str) -> CliResult<T>;
    fn model_err(self, ctx: &str) -> CliResult<T>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn data_err(self, ctx: &str) -> CliResult<T> {
        self.map_err(|e| CliError::data(format!("{ctx}: {e}")))
    }

    fn model_err(self, ctx: &str) -> CliResult<T> {
        self.map_err(|e| CliError::model(format!("{ctx}: {e}")))
    }
}
