use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("non-finite value in series {series} at index {index}")]
    NonFiniteValue { series: String, index: usize },

    #[error("a time series must contain at least one value")]
    EmptySeries,

    #[error("cost function is not admissible for {bound}: requires {requirement}")]
    CostFunctionInadmissible {
        bound: &'static str,
        requirement: &'static str,
    },

    #[error("{bound} requires series of length at least {min}, got {len}")]
    SeriesTooShort {
        bound: &'static str,
        len: usize,
        min: usize,
    },

    #[error("band count k={k} out of range for series length {len} (must be <= len/2)")]
    InvalidK { k: usize, len: usize },

    #[error("band index {index} out of range 1..={len}")]
    InvalidBandIndex { index: usize, len: usize },

    #[error("window {given} differs from the window {prepared} the candidates were prepared with")]
    WindowMismatch { given: usize, prepared: usize },

    #[error("unknown bound selector {0:?}")]
    UnknownBound(String),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("sorted search requires a lower bound selector")]
    BoundRequired,

    #[error("window fraction {0} outside (0, 1]")]
    InvalidFraction(f64),

    #[error("window of size zero is rejected for tightness evaluation")]
    WindowZeroRejected,

    #[error("no recommended window known for dataset {0}")]
    NoRecommendedWindow(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("ragged row at line {line}: expected {expected} values, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("index {index} out of range for collection of {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output error: {0}")]
    Csv(#[from] csv::Error),
}
