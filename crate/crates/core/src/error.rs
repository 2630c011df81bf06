use thiserror::Error;

use crate::domain::DomainKind;

#[derive(Debug, Error)]
pub enum MclError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point representation does not match domain {0}")]
    KindMismatch(DomainKind),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset has {found} points but the tree was built over {expected}")]
    DatasetSizeMismatch { expected: usize, found: usize },

    #[error("eps*d = {product} is not an integer offset; valid eps are multiples of 1/{dim}")]
    OffGrid { product: f64, dim: usize },

    #[error("no witness point satisfied the set predicate within {budget} draws")]
    EmptyWitness { budget: usize },

    #[error("no measure available for concept {0}")]
    MissingMeasure(String),

    #[error("subset enumeration is limited to {max} points, got {found}")]
    TooManyPoints { max: usize, found: usize },

    #[error("malformed {format} input: {reason}")]
    Format {
        format: &'static str,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MclError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> MclError {
    MclError::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
