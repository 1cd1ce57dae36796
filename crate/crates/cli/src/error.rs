use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;
use toeplitz_lab::LabError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },

    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Lab(#[from] LabError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn validation(field: impl Into<String>, message: impl std::fmt::Display) -> Self {
        CliError::Validation {
            field: field.into(),
            message: message.to_string(),
        }
    }

    /// Machine-readable body of `error.json`.
    pub fn to_json(&self) -> Value {
        let (kind, extra) = match self {
            CliError::Parse { line, column, .. } => {
                ("ParseError", json!({"line": line, "column": column}))
            }
            CliError::Validation { field, .. } => ("ValidationError", json!({"field": field})),
            CliError::Io { path, .. } => ("IoError", json!({"path": path})),
            CliError::Usage(_) => ("UsageError", json!({})),
            CliError::Lab(e) => (e.kind(), json!({})),
        };
        let mut body = json!({"kind": kind, "message": self.to_string()});
        if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
            b.extend(e);
        }
        json!({ "error": body })
    }
}
