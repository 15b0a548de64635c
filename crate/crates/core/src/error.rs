use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inputs from different scenarios or groups, or an unknown function id.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request exceeds a configured size cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// The scenario does not provide what the operation needs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A translate pool ran out before the target sample was covered.
    #[error("covering failed: {uncovered} of {total} witness points left uncovered")]
    Coverage { uncovered: usize, total: usize },

    /// Invalid scenario parameters.
    #[error("invalid scenario: {0}")]
    Construction(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
