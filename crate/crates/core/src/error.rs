use crate::alphabet::EventId;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesError {
    #[error("event {0} has conflicting controllability flags")]
    FlagMismatch(EventId),
    #[error("event {0} is owned by two different agents")]
    AgentMismatch(EventId),
    #[error("alphabets differ: {0}")]
    AlphabetMismatch(String),
    #[error("event {0} is not in the alphabet")]
    UnknownEvent(EventId),
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, DesError>;
