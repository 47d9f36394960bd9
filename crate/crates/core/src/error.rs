use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-domain argument.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A mathematical hypothesis of the construction does not hold
    /// (torsion or integral generator, Frey equation violated, ...).
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    /// Factoring or search effort ran out before the answer was certain.
    #[error("budget exhausted: {0}")]
    Budget(String),
    /// An internal consistency check failed. Always a bug.
    #[error("internal fault: {0}")]
    Fault(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }

    pub fn fault(msg: impl Into<String>) -> Self {
        Error::Fault(msg.into())
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::Hypothesis(_) => 3,
            Error::Budget(_) => 4,
            Error::Fault(_) => 1,
        }
    }
}
