use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which side of a prediction/ground-truth pair an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskSide {
    Pred,
    Gt,
}

impl fmt::Display for MaskSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaskSide::Pred => f.write_str("prediction"),
            MaskSide::Gt => f.write_str("ground truth"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    // volume-io
    #[error("unsupported SEG-Y sample format code {0} (expected 1 or 5)")]
    UnsupportedFormatCode(u16),
    #[error("truncated file: {0}")]
    TruncatedFile(String),
    #[error("irregular survey geometry: {0}")]
    IrregularGeometry(String),
    #[error("size mismatch: expected {expected} bytes, found {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("non-finite sample at flat index {0}")]
    NonFiniteSample(usize),
    #[error("unsupported array dtype: {0}")]
    UnsupportedDtype(String),
    #[error("unsupported array rank {0} (expected 2 or 3)")]
    UnsupportedRank(usize),
    #[error("fortran-ordered arrays are not supported")]
    FortranOrderUnsupported,
    #[error("unsupported PNG color type: {0}")]
    UnsupportedColorType(String),
    #[error("malformed {format} data: {message}")]
    Malformed {
        format: &'static str,
        message: String,
    },

    // preprocess
    #[error("volume is constant; min-max normalization is undefined")]
    ConstantVolume,
    #[error("volume has zero variance; z-score normalization is undefined")]
    ZeroVariance,
    #[error("index {index} out of range for axis of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("window {window:?} does not fit section {section:?}")]
    WindowLargerThanSection {
        window: (usize, usize),
        section: (usize, usize),
    },
    #[error("pixel ({row}, {col}) is not covered by any patch")]
    CoverageGap { row: usize, col: usize },
    #[error("invalid tiling spec: {0}")]
    InvalidTiling(String),

    // metrics / losses
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{0} mask is empty")]
    EmptyMask(MaskSide),
    #[error("probability values must be finite and within [0, 1]: {0}")]
    InvalidProbability(String),

    // threshold
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("length mismatch: {left} predictions vs {right} ground-truth masks")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid threshold grid: {0}")]
    InvalidGrid(String),

    // faultlab
    #[error("salt noise of {requested} pixels exceeds the {available} background pixels")]
    SaltNoiseOverflow { requested: usize, available: usize },
    #[error("no contradicting pair found within a budget of {0} candidates")]
    NotFoundWithinBudget(usize),
    #[error("invalid fault spec: {0}")]
    InvalidSpec(String),

    // bench
    #[error("no prediction/ground-truth pairs matched by file stem")]
    NoPairsFound,
    #[error("every record is degenerate for metric {0}")]
    AllDegenerate(&'static str),
    #[error("ranking needs at least 2 configurations for test set {test_set:?}, found {found}")]
    InsufficientConfigs { test_set: String, found: usize },
    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("unknown {kind} {name:?} (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
