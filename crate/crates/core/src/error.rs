use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("missing cumulant of order {order} (distribution carries up to {available})")]
    MissingCumulant { order: usize, available: usize },
    #[error("span {0} is not 1; the lattice expansion needs span-1 variables")]
    Span(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
