use std::path::Path;

use serde::Serialize;

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad or inconsistent arguments; exit 2.
    Args(String),
    /// Unreadable, unwritable or malformed file; exit 3.
    File { path: String, message: String },
    /// The inputs were read but the model rejects them; exit 4.
    Domain(String),
}

#[derive(Serialize)]
struct Record<'a> {
    error: &'a str,
    code: i32,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
}

impl CliError {
    pub fn file(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::File { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn code(&self) -> i32 {
        match self {
            CliError::Args(_) => 2,
            CliError::File { .. } => 3,
            CliError::Domain(_) => 4,
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let (kind, message, path) = match self {
            CliError::Args(m) => ("arguments", m.as_str(), None),
            CliError::File { path, message } => ("file", message.as_str(), Some(path.as_str())),
            CliError::Domain(m) => ("domain", m.as_str(), None),
        };
        serde_json::to_string(&Record { error: kind, code: self.code(), message, path })
            .unwrap_or_else(|_| format!("{{\"error\":\"{kind}\",\"code\":{}}}", self.code()))
    }
}

impl From<ism_tree::Error> for CliError {
    fn from(e: ism_tree::Error) -> Self {
        match e {
            ism_tree::Error::InvalidParams(m) => CliError::Args(m),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<ism_harness::HarnessError> for CliError {
    fn from(e: ism_harness::HarnessError) -> Self {
        match e {
            ism_harness::HarnessError::Model(m) => m.into(),
            ism_harness::HarnessError::InvalidScenario(m) | ism_harness::HarnessError::InvalidWorld(m) => CliError::Args(m),
            ism_harness::HarnessError::EmptyGrid => CliError::Args(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
