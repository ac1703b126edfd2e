use std::fmt;

use thiserror::Error;

/// Location-tagged syntax error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub found: String,
    pub expected: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: unexpected {}", self.line, self.column, self.found)?;
        if !self.expected.is_empty() {
            write!(f, ", expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("syntax error at {0}")]
    Syntax(Diagnostic),

    #[error("in {name}: {message}")]
    Resolve { name: String, message: String },

    #[error("{command}: {source}")]
    Engine {
        command: String,
        #[source]
        source: igusa_core::Error,
    },

    #[error("{command}: verification failed: {detail}")]
    Verification { command: String, detail: String },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn resolve(name: &str, message: impl Into<String>) -> Self {
        CliError::Resolve {
            name: name.to_string(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 for input errors, 3 for engine errors, 4 for failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Syntax(_) | CliError::Resolve { .. } | CliError::Io { .. } => 2,
            CliError::Engine { .. } => 3,
            CliError::Verification { .. } => 4,
        }
    }
}
