use std::fmt;

/// Configuration or I/O failure: the run could not be carried out at all.
/// Distinct from a verdict failure, which is a completed run whose checks
/// did not pass. Maps to exit code 1; verdict failures map to 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn key(key: &str, detail: impl fmt::Display) -> Self {
        CliError(format!("config key `{key}`: {detail}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(format!("io error: {e}"))
    }
}
