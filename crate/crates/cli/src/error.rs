use std::fmt;

/// A failed command: a stable code plus a human-readable message.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn missing_argument(name: &str) -> Self {
        CliError::new("MissingArgument", format!("`--{name}` is required (flag or config key)"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error: code={} message={}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<mlood_core::Error> for CliError {
    fn from(e: mlood_core::Error) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Prefixes the message of a core error with what was being done.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for mlood_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::new(e.code(), format!("{}: {e}", what())))
    }
}
