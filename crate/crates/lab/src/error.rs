use std::path::PathBuf;

use serde::Serialize;
use spillover_core::{Error as CoreError, ErrorClass};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("missing required column \"{column}\"")]
    Schema { column: String },
    #[error("row {row}, column \"{column}\": cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("invalid model file: {0}")]
    ModelFile(String),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            LabError::Core(e) => e.class(),
            LabError::Usage(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }

    /// 1 for usage errors, 2 for data errors, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        exit_code(self.class())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Core(e) => e.kind(),
            LabError::Io { .. } => "io",
            LabError::Schema { .. } => "schema",
            LabError::Parse { .. } => "parse",
            LabError::Csv(_) => "csv",
            LabError::Json(_) => "json",
            LabError::ModelFile(_) => "model_file",
            LabError::Usage(_) => "usage",
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            class: &'a str,
            exit_code: i32,
            message: String,
        }
        let class = match self.class() {
            ErrorClass::Usage => "usage",
            ErrorClass::Data => "data",
            ErrorClass::Numeric => "numeric",
        };
        serde_json::to_string(&Report {
            error: self.kind(),
            class,
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .expect("plain struct serializes")
    }
}

pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numeric => 3,
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Csv(e.to_string())
    }
}
