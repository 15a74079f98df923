use thiserror::Error;

pub type Result<T, E = BleuError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BleuError {
    #[error("invalid n-gram order {0}: must be at least 1")]
    InvalidOrder(usize),

    #[error("n-gram order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("at least one reference set is required")]
    NoReferences,

    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("compact id {id} out of range for {num_unique} unique n-grams")]
    IdOutOfRange { id: usize, num_unique: usize },

    #[error("counting capacity exceeded: {rows} rows x {cols} columns does not fit the index type")]
    Capacity { rows: usize, cols: usize },

    #[error("invalid batch: {0}")]
    InvalidBatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),
}

impl BleuError {
    pub(crate) fn shape(what: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        BleuError::ShapeMismatch {
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
