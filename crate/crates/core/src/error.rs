use thiserror::Error;

/// Errors raised by the analysis library.
///
/// Parse failures of the textual formats have their own type,
/// [`ParseError`](crate::dsl::ParseError), since they carry source spans.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A transition refers to a parameter, register or constant it cannot see.
    #[error("malformed transition: {0}")]
    MalformedTransition(String),
    /// The automaton tuple violates one of its structural invariants.
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    /// The caller passed arguments outside an operation's domain.
    #[error("usage error: {0}")]
    Usage(String),
    /// An operation was called on a value it requires to be consistent.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
