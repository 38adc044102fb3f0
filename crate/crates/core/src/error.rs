use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{n} is outside the table range 1..={limit}")]
    OutOfRange { n: u64, limit: u64 },

    #[error("cannot allocate {requested_bytes} bytes for a table of {entries} entries")]
    Resource { requested_bytes: u128, entries: u64 },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("{n} is not {k}-full: prime {prime} divides it only {exponent} time(s)")]
    NotKFull { n: u64, k: u32, prime: u64, exponent: u32 },

    /// Two routes that must agree exactly disagreed; indicates a bug.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
