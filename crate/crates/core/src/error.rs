use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("entry {value} at row {}, column {} is outside {{0, 1, -1}}", .row + 1, .col + 1)]
    EntryOutOfRange { row: usize, col: usize, value: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("size guard exceeded: {0}")]
    TooLarge(String),
    #[error("internal error: {0}")]
    Internal(String),
}
