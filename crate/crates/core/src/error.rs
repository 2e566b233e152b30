use thiserror::Error;

/// Errors raised by the toolkit. Every variant carries enough context to name
/// the offending input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation exceeds a configured size budget.
    #[error("resource limit exceeded: {what} needs {needed}, budget is {budget}")]
    Resource {
        what: &'static str,
        needed: String,
        budget: String,
    },

    /// A caller-supplied parameter violates an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Polynomial degree outside what an operation supports.
    #[error("unsupported degree {degree}: {reason}")]
    UnsupportedDegree { degree: usize, reason: &'static str },

    /// A polynomial vanishes at a point where a non-zero value is required.
    #[error("polynomial vanishes at n = {n}; square-freeness of 0 is undefined")]
    VanishesAt { n: u64 },

    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),

    /// Two independently computed quantities disagree. Always a bug.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn resource(what: &'static str, needed: impl ToString, budget: impl ToString) -> Self {
        Error::Resource {
            what,
            needed: needed.to_string(),
            budget: budget.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
