use thiserror::Error;

/// Every failure the crate can report.
///
/// `NoReconfigurationExists` is deliberately absent: it is a domain outcome
/// carried by [`crate::engine::ReconfResult`], not an error.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Undeclared mode, event, input or state; malformed automaton.
    #[error("model error: {0}")]
    Model(String),
    /// A non-finite value showed up in a state or derivative.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Observation and interval specs do not line up.
    #[error("configuration error: {0}")]
    Config(String),
    /// Formula or CNF could not be encoded (undeclared atom, bad literal).
    #[error("encoding error: {0}")]
    Encoding(String),
    /// An operation was called outside its contract, e.g. `assign` on UNSAT.
    #[error("contract violation: {0}")]
    Contract(String),
    /// System-model constraint violates the guard/consequence vocabulary split.
    #[error("model authoring error: {0}")]
    Authoring(String),
    /// Scenario refers to unknown components or breaks its own invariants.
    #[error("scenario error: {0}")]
    Scenario(String),
    /// A document failed to parse or carries the wrong schema tag.
    #[error("schema error: {0}")]
    Schema(String),
    /// Enumeration oracle asked to cover too many inputs.
    #[error("oracle scope error: {0}")]
    OracleScope(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
