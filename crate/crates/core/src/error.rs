use thiserror::Error;

/// Errors raised by the channel, distribution and search routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate channel: {0}")]
    Degenerate(String),

    #[error("numerical inconsistency: {what} evaluated to {value:e}")]
    Numerical { what: &'static str, value: f64 },

    #[error("tensor of {entries} entries exceeds the cap of {cap}")]
    Size { entries: u128, cap: usize },

    #[error("channel is not many-to-one: {0}")]
    NotManyToOne(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
