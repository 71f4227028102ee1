use serde_json::json;

use magicflow::Error;

/// A failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub kind: &'static str,
    pub message: String,
}

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_VALIDATION,
            kind: "validation",
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_NUMERICAL,
            kind: "numerical",
            message: message.into(),
        }
    }

    /// Single-line JSON error record for stderr.
    pub fn record(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": self.kind,
                "exit_code": self.exit_code,
                "message": self.message,
            }
        })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::UnknownCode(_)
            | Error::Io(_)
            | Error::OutputIndex { .. }
            | Error::PlaneMismatch(_)
            | Error::InvalidModel(_)
            | Error::Dimension { .. } => CliError::usage(message),
            Error::Parse { .. } | Error::PauliSyntax(_) | Error::InvalidCode(_) => {
                CliError::validation(message)
            }
            Error::Singular { .. }
            | Error::NotFixedPoint { .. }
            | Error::Degenerate(_)
            | Error::GroupTooLarge { .. }
            | Error::DenseCapExceeded { .. } => CliError::numerical(message),
        }
    }
}
