use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),

    #[error("n = {n} exceeds the enumeration budget (max n = {limit})")]
    BudgetExceeded { n: usize, limit: usize },

    #[error("no distance value assigned to label {0}")]
    MissingLabel(u8),

    #[error("distances are not planar: third Gram eigenvalue {third:e} vs largest {largest:e}")]
    RankExceedsTwo { third: f64, largest: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
