use std::fmt;

use thiserror::Error;

/// One problem found while reading a scenario, with the line it refers to
/// (0 when the problem concerns the file as a whole).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { line, field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}: {}", self.line, self.field, self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario:\n{}", render(.0))]
    Validation(Vec<Violation>),

    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: tripod_core::Error,
    },

    #[error("{0}")]
    Threshold(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Input(String),
}

fn render(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn solver(context: impl Into<String>, source: tripod_core::Error) -> Self {
        CliError::Solver { context: context.into(), source }
    }

    pub fn io(path: impl fmt::Display, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_string(), source }
    }

    /// Process exit code: 2 validation, 3 singularity, 4 acceptance threshold.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Input(_) => 2,
            CliError::Solver { source: tripod_core::Error::Singularity { .. }, .. } => 3,
            CliError::Solver { source, .. } if is_config(source) => 2,
            CliError::Threshold(_) => 4,
            _ => 1,
        }
    }
}

fn is_config(e: &tripod_core::Error) -> bool {
    use tripod_core::Error::*;
    matches!(e, Config(_) | Cfl { .. } | Domain(_) | Inadmissible(_) | FitRefused { .. } | Mismatch(_))
}
