use thiserror::Error;

use crate::rational::Bounds;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain of an operation (bad parameter, family mismatch, violated precondition).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured cap (stage count, cell count, word count) was exceeded.
    /// Carries the best bounds reached, when the operation produces bounds.
    #[error("resource error: {message}")]
    Resource {
        message: String,
        best: Option<Bounds>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource {
            message: msg.into(),
            best: None,
        }
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
