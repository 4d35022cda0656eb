//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("matrix has {rows} rows, at least {required} required")]
    TooFewRows { rows: usize, required: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("uniform noise range is inverted: mu + 2*sigma = {half_width} <= 0 (mu = {mu}, sigma = {sigma})")]
    InvertedRange { mu: f64, sigma: f64, half_width: f64 },

    #[error("k = {k} exceeds the number of points ({n})")]
    TooManyClusters { k: usize, n: usize },

    #[error("only {distinct} distinct points available for k = {k} centers")]
    InsufficientDistinctPoints { k: usize, distinct: usize },

    #[error("{found} distinct cluster(s) present, at least 2 required")]
    TooFewClusters { found: usize },

    #[error("partition lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("summary csv: {0}")]
    Schema(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Short machine-readable tag used in the summary CSV status column.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse { .. } | Error::Format { .. } => "parse",
            Error::TooFewRows { .. } => "too_few_rows",
            Error::NonFinite { .. } => "non_finite",
            Error::InvertedRange { .. } => "inverted_range",
            Error::TooManyClusters { .. } => "too_many_clusters",
            Error::InsufficientDistinctPoints { .. } => "degenerate_points",
            Error::TooFewClusters { .. } => "too_few_clusters",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::UnknownMetric(_) => "unknown_metric",
            Error::Config { .. } => "config",
            Error::Schema(_) => "schema",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
        }
    }
}
