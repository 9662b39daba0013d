use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;
use vocalis_core::DatasetError;
use vocalis_engine::EngineError;

/// Exit code 1 for bad input, 2 for failures while computing.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Input { file: Option<PathBuf>, message: String },
    #[error("{message}")]
    Compute { file: Option<PathBuf>, message: String },
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self::Input { file: None, message: message.into() }
    }

    pub fn compute(message: impl Into<String>) -> Self {
        Self::Compute { file: None, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input { .. } => 1,
            Self::Compute { .. } => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Input { .. } => "input",
            Self::Compute { .. } => "compute",
        }
    }

    pub fn file(&self) -> Option<&Path> {
        match self {
            Self::Input { file, .. } | Self::Compute { file, .. } => file.as_deref(),
        }
    }

    /// Attach a file unless one is already named.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            Self::Input { file: None, message } => Self::Input { file: Some(path.into()), message },
            Self::Compute { file: None, message } => Self::Compute { file: Some(path.into()), message },
            other => other,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Compute(inner) => inner.into(),
            other => Self::input(other.to_string()),
        }
    }
}

impl From<vocalis_core::Error> for CliError {
    fn from(e: vocalis_core::Error) -> Self {
        Self::compute(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Dataset(d) => d.into(),
            EngineError::Compute(c) => c.into(),
            e @ (EngineError::Io(_)
            | EngineError::Json(_)
            | EngineError::MissingModality(_)
            | EngineError::InvalidConfig(_)
            | EngineError::UnknownReference(_)) => Self::input(e.to_string()),
            other => Self::compute(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::input(e.to_string())
    }
}

/// Diagnostics as JSON lines.
pub struct Diagnostics<'a> {
    out: &'a mut dyn Write,
}

impl<'a> Diagnostics<'a> {
    pub fn new(out: &'a mut dyn Write) -> Self {
        Self { out }
    }

    pub fn error(&mut self, err: &CliError) {
        let line = json!({
            "level": "error",
            "kind": err.kind(),
            "file": err.file().map(|p| p.display().to_string()),
            "message": err.to_string(),
        });
        let _ = writeln!(self.out, "{line}");
    }

    pub fn warning(&mut self, file: Option<&Path>, message: &str) {
        let line = json!({
            "level": "warning",
            "file": file.map(|p| p.display().to_string()),
            "message": message,
        });
        let _ = writeln!(self.out, "{line}");
    }
}
