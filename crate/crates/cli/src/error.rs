use std::fmt;

/// Everything a command can fail with, mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// File could not be read or written.
    Io(String),
    /// Input does not match a schema, or flags are inconsistent.
    Schema(String),
    /// Error raised by a computation.
    Core(pinvcond_core::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;

impl CliError {
    pub fn schema(e: impl fmt::Display) -> Self {
        CliError::Schema(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Core(e) if e.is_degenerate() => EXIT_DEGENERATE,
            // Malformed arguments reaching the library are input problems too.
            CliError::Core(_) => EXIT_SCHEMA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<pinvcond_core::Error> for CliError {
    fn from(e: pinvcond_core::Error) -> Self {
        CliError::Core(e)
    }
}
