use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument fell outside the domain an operation is defined on.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numeration system could not supply a term it was asked for.
    #[error("numeration system `{system}` has no term u_{index}: {reason}")]
    Basis {
        system: String,
        index: usize,
        reason: String,
    },

    #[error("{what} = {requested} exceeds the configured limit of {limit}")]
    ResourceBound {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
