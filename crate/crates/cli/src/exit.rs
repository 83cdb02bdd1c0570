use std::fmt;

/// Process exit statuses.
pub const OK: u8 = 0;
pub const FAILURE: u8 = 1;
pub const USAGE: u8 = 2;
pub const UNAVAILABLE: u8 = 3;

/// An error that ends the command with a specific exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl fmt::Display) -> Self {
        CliError {
            code: USAGE,
            message: message.to_string(),
        }
    }

    pub fn failure(message: impl fmt::Display) -> Self {
        CliError {
            code: FAILURE,
            message: message.to_string(),
        }
    }

    pub fn unavailable(message: impl fmt::Display) -> Self {
        CliError {
            code: UNAVAILABLE,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult = Result<u8, CliError>;
