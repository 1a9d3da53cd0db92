use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The resultant vector of a set of angles is (numerically) zero, so no
    /// mean direction exists.
    #[error("circular mean is undefined (resultant length {0:e})")]
    DegenerateMean(f64),

    /// A BIC score cannot be evaluated for this clustering.
    #[error("BIC not computable: {0}")]
    NotComputable(String),

    /// No K in the requested range yielded a computable BIC.
    #[error("no computable K in range {k_min}..={k_max}")]
    SelectionFailed { k_min: usize, k_max: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("model file checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    Checksum { stored: u32, computed: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
