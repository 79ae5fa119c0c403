use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn validation<S: Into<String>>(msg: S) -> Error {
    Error::Validation(msg.into())
}

pub(crate) fn contract<S: Into<String>>(msg: S) -> Error {
    Error::Contract(msg.into())
}
