use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("invalid identifiers: {0}")]
    InvalidIds(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A brute-force or enumeration guard refused the input.
    #[error("{what} exceeds size limit: {count} > {limit}")]
    SizeLimit {
        what: &'static str,
        count: u128,
        limit: u128,
    },
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("unsolvable instance: {0}")]
    Unsolvable(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
