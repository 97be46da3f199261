use std::path::PathBuf;

use serde::Serialize;

/// Failures of a command or request, with a stable machine-readable kind.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] polarcut::Error),

    #[error("malformed JSON in {path}: {source}")]
    MalformedJson {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("png encoding failed: {0}")]
    Png(#[from] png::EncodingError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::MalformedJson { .. } => "malformed_json",
            CliError::Usage(_) => "usage",
            CliError::Csv(_) => "csv",
            CliError::Png(_) => "internal",
        }
    }

    /// Process exit status: 2 for bad input, 1 when the tool itself failed.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "internal" => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ErrorBody::from(self)).expect("error body serializes")
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Serialize)]
pub struct ErrorDetail {
    pub kind: String,
    pub message: String,
}

impl From<&CliError> for ErrorBody {
    fn from(e: &CliError) -> Self {
        ErrorBody {
            error: ErrorDetail {
                kind: e.kind().to_string(),
                message: e.to_string(),
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
