use thiserror::Error;

/// Errors raised by the selection toolkit.
///
/// `Domain` covers arguments outside a function's mathematical domain
/// (a payoff outside `[0,1]`, an arm index out of range). `Config` covers
/// experiment settings that cannot be run (budget smaller than the number of
/// arms, state-space guards exceeded).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
