use std::fmt;

use torrey_lab::Error;

/// A failed command with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_NO_CONVERGENCE: u8 = 4;

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn no_convergence(message: impl Into<String>) -> Self {
        Self { code: EXIT_NO_CONVERGENCE, message: message.into() }
    }

    /// Prefixes the message with the stage that failed.
    pub fn stage(self, label: &str) -> Self {
        Self { message: format!("{label}: {}", self.message), ..self }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::DegenerateTimestamps(_) | Error::EmptySeries(_) | Error::InvalidPhase(_) => {
                EXIT_CONFIG
            }
            Error::FitNotConverged(_) => EXIT_NO_CONVERGENCE,
            _ => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::config(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self::config(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::config(format!("json: {e}"))
    }
}

pub type CliResult<T> = Result<T, Failure>;
