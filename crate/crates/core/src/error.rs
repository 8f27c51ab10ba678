use thiserror::Error;

/// Errors raised by the solvers and the game model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violated a structural or numeric precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A good or agent index does not exist in the instance.
    #[error("unknown {kind} {index}")]
    Lookup { kind: &'static str, index: usize },

    /// A table or enumeration would exceed its configured size limit.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Best-response dynamics stopped before reaching a stable state.
    #[error("dynamics did not converge within {rounds} rounds")]
    NotConverged { rounds: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
