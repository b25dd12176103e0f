use std::path::PathBuf;

/// Errors produced by the index, its file formats and the analysis toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("metric mismatch: {left:?} vs {right:?}")]
    MetricMismatch {
        left: crate::Metric,
        right: crate::Metric,
    },

    #[error("vector set is empty")]
    EmptySet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in row {row}")]
    NonFinite { row: usize },

    #[error("zero-norm vector in row {row} cannot be normalized for cosine distance")]
    ZeroNorm { row: usize },

    #[error("truncated file {path:?}: expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("header of {path:?} overflows: {count} x {dim}")]
    HeaderOverflow { path: PathBuf, count: u64, dim: u64 },

    #[error("bad magic: expected \"ROAR\", found {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported index format version {0}")]
    UnsupportedVersion(u32),

    #[error("corrupt index: {0}")]
    Corrupt(String),

    #[error("node id {id} out of range (bound {bound})")]
    IdOutOfRange { id: u64, bound: u64 },

    #[error("ground truth row {row} is not sorted by distance")]
    UnsortedRow { row: usize },

    #[error("ground truth row {row} contains duplicate id {id}")]
    DuplicateId { row: usize, id: u32 },

    #[error("covariance matrix is singular after regularization")]
    SingularCovariance,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
