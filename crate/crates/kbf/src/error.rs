use std::io;
use std::path::PathBuf;

use kbf_core::ValidationReport;
use thiserror::Error;

/// Failure to turn a scenario file into a validated [`kbf_core::Scenario`].
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid scenario: {0}")]
    Invalid(ValidationReport),
}

/// Malformed scenario JSON. `line` and `column` are 1-based; `message`
/// names the offending key where the parser knows it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        let full = e.to_string();
        // serde_json appends " at line L column C"; keep only the message.
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        Self {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("cannot write {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed report row {row}: {message}")]
    Report { row: usize, message: String },
}
