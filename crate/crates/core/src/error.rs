use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Quadrature could not reach the requested tolerance; `estimate` is the best value found.
    #[error("tolerance not met: estimate {estimate:e}, error bound {bound:e} > {requested:e}")]
    Tolerance {
        estimate: f64,
        bound: f64,
        requested: f64,
    },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
