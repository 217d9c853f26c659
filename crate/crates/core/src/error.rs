use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DriftError>;

/// Every failure the pipeline can surface.
///
/// Variants are grouped by the stage that raises them. `category()` gives the
/// stable machine-readable name printed by the CLI.
#[derive(Debug, Error)]
pub enum DriftError {
    // linear algebra
    #[error("vector norm {norm:e} is below the degeneracy threshold")]
    ZeroVector { norm: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix shape {rows}x{cols} is invalid: {reason}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },
    #[error("window has {rows} rows; centering needs at least 2")]
    WindowTooSmall { rows: usize },
    #[error("centered window has no variance (max |entry| = {max_abs:e})")]
    ZeroVarianceWindow { max_abs: f64 },
    #[error(
        "power iteration did not converge after {iterations} iterations \
         (last step {last_delta:e}, lambda1 ~ {lambda1:e}, lambda2 ~ {lambda2:e}): {reason}"
    )]
    NoConvergence {
        iterations: usize,
        last_delta: f64,
        lambda1: f64,
        lambda2: f64,
        reason: &'static str,
    },
    #[error("window {index} (source row {start}): {source}")]
    Window {
        index: usize,
        start: usize,
        #[source]
        source: Box<DriftError>,
    },

    // metrics / trajectory
    #[error("increment {index} is {value}; drift increments must be finite and >= 0")]
    NegativeIncrement { index: usize, value: f64 },
    #[error("invalid window spec: {0}")]
    InvalidSpec(String),
    #[error("trajectory has {len} directions; at least 2 are needed for steps")]
    TrajectoryTooShort { len: usize },
    #[error("epsilon must be finite and > 0, got {0}")]
    InvalidEpsilon(f64),
    #[error("unit norm violated at direction {index}: |r| = {norm}")]
    NotUnit { index: usize, norm: f64 },

    // stats
    #[error(
        "no paired difference exceeds the zero tolerance {zero_tol:e}; sign test not applicable"
    )]
    AllZero { zero_tol: f64 },

    // synth
    #[error("step angle {0} must lie in [0, pi/2)")]
    InvalidAngle(f64),
    #[error("position {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    // ingest
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("file has no data rows")]
    EmptyFile,
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("cannot parse {value:?} at row {row}, column {col}")]
    ParseError {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("non-finite value at row {row}, column {col} ({count} non-finite entries total)")]
    NonFiniteData {
        row: usize,
        col: usize,
        count: usize,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    // registry
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl DriftError {
    pub fn category(&self) -> &'static str {
        match self {
            DriftError::ZeroVector { .. } => "ZeroVector",
            DriftError::DimensionMismatch { .. } => "DimensionMismatch",
            DriftError::InvalidShape { .. } => "InvalidShape",
            DriftError::WindowTooSmall { .. } => "WindowTooSmall",
            DriftError::ZeroVarianceWindow { .. } => "ZeroVarianceWindow",
            DriftError::NoConvergence { .. } => "NoConvergence",
            DriftError::Window { source, .. } => source.category(),
            DriftError::NegativeIncrement { .. } => "NegativeIncrement",
            DriftError::InvalidSpec(_) => "InvalidSpec",
            DriftError::TrajectoryTooShort { .. } => "TrajectoryTooShort",
            DriftError::InvalidEpsilon(_) => "InvalidEpsilon",
            DriftError::NotUnit { .. } => "NotUnit",
            DriftError::AllZero { .. } => "AllZero",
            DriftError::InvalidAngle(_) => "InvalidAngle",
            DriftError::IndexOutOfRange { .. } => "IndexOutOfRange",
            DriftError::FileNotFound(_) => "FileNotFound",
            DriftError::EmptyFile => "EmptyFile",
            DriftError::RaggedRows { .. } => "RaggedRows",
            DriftError::ParseError { .. } => "ParseError",
            DriftError::NonFiniteData { .. } => "NonFiniteData",
            DriftError::Csv(_) => "CsvError",
            DriftError::UnknownMetric(_) => "UnknownMetric",
            DriftError::Io(_) => "IoError",
            DriftError::Json(_) => "IoError",
        }
    }

    /// Errors caused by bad parameters rather than bad data.
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            DriftError::InvalidSpec(_)
                | DriftError::InvalidEpsilon(_)
                | DriftError::InvalidAngle(_)
                | DriftError::IndexOutOfRange { .. }
                | DriftError::UnknownMetric(_)
        )
    }
}
