//! Error type shared across the library.
//!
//! Guarded searches never guess: when an input exceeds a search guard the
//! operation fails with [`Error::GuardExceeded`] instead of returning an
//! unverified answer.  Constructions whose hypotheses are not met fail with
//! [`Error::Hypothesis`].

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data (bad indices, mismatched fields,
    /// invalid JSON payloads and the like).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A brute-force search guard was exceeded.  The operation refuses to run
    /// rather than silently degrade to a heuristic.
    #[error("search guard exceeded for {what}: size {size} > limit {limit}")]
    GuardExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    /// A construction's hypothesis does not hold for the given input and no
    /// override was requested.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A construction step that is guaranteed to succeed under the stated
    /// hypotheses failed anyway.  This indicates a bug and is never silently
    /// swallowed.
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
