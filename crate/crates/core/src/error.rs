//! Crate-wide error type.
//!
//! Every failure renders as a single line so callers can forward it to
//! stderr verbatim.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // -- ingestion --------------------------------------------------------
    #[error("transport failure ({}retriable): {message}", if *.retriable { "" } else { "non-" })]
    Transport { message: String, retriable: bool },

    #[error("symbol not found: {symbol}")]
    SymbolNotFound { symbol: String },

    #[error("malformed payload: field `{field}`: {detail}")]
    MalformedPayload { field: String, detail: String },

    #[error("csv row {row}: {message}")]
    CsvRow { row: usize, message: String },

    #[error("non-monotone timestamps at row {row}")]
    NonMonotoneTimestamps { row: usize },

    #[error("non-positive price at row {row}, column {column}")]
    NonPositivePrice { row: usize, column: String },

    #[error("no common timestamp range across retained series")]
    NoCommonRange,

    // -- returns / ensembles ----------------------------------------------
    #[error("degenerate asset (zero variance): {symbol}")]
    DegenerateAsset { symbol: String },

    #[error("degenerate window (zero variance) for asset {symbol}")]
    DegenerateWindow { symbol: String },

    #[error("insufficient data: need {needed}, have {available}")]
    InsufficientData { needed: usize, available: usize },

    // -- numerics -----------------------------------------------------------
    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("cannot unfold: {0}")]
    CannotUnfold(String),

    #[error("ill-conditioned kernel (condition estimate {cond:.3e})")]
    IllConditionedKernel { cond: f64 },

    #[error("rank {rank} out of range for {m} assets")]
    RankOutOfRange { rank: usize, m: usize },

    // -- structure ----------------------------------------------------------
    #[error("no spanning tree: graph disconnected (non-finite distances)")]
    NoSpanningTree,

    #[error("fit domain error: non-positive differences at levels {levels:?}")]
    FitDomain { levels: Vec<usize> },

    #[error("degenerate fit: slope {slope:.3e} yields no finite characteristic partition")]
    DegenerateSlope { slope: f64 },

    #[error("label not present in external ranking: {label}")]
    MissingLabel { label: String },

    #[error("degenerate variance: correlation undefined")]
    DegenerateVariance,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    // -- plumbing -----------------------------------------------------------
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when retrying the same request may succeed.
    pub fn is_retriable(&self) -> bool {
        matches!(self, Error::Transport { retriable: true, .. })
    }
}
