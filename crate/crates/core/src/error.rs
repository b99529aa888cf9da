use std::path::PathBuf;

use thiserror::Error;

/// Diagnostics attached to a failed or suspicious global solve.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolveDiagnostics {
    pub unknowns: usize,
    pub nonzeros: usize,
    pub relative_residual: Option<f64>,
    pub condition_estimate: Option<f64>,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed mesh JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("non-conforming mesh: {0}")]
    NonConforming(String),

    #[error("degenerate cell {cell}: {reason}")]
    DegenerateCell { cell: usize, reason: String },

    #[error("element {cell}: {reason}")]
    Element { cell: usize, reason: String },

    #[error("boundary traces disagree: {0}")]
    BoundaryMismatch(String),

    #[error("boundary orientation mismatch: {0}")]
    OrientationMismatch(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("near-resonance or invalid mesh: {message} ({diagnostics:?})")]
    NearResonance {
        message: String,
        diagnostics: SolveDiagnostics,
    },

    #[error("spaces are not comparable: {0}")]
    Incomparable(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("refinement level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
