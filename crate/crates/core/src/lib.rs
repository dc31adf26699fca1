//! Supervisor localization for multi-agent discrete-event systems.

pub mod alphabet;
pub mod cli;
pub mod automaton;
pub mod error;
pub mod eventred;
pub mod format;
pub mod localize;
pub mod models;
pub mod randtest;
pub mod reduce;
pub mod report;
pub mod synthesis;

pub use alphabet::{AgentPartition, Alphabet, EventId, EventSet};
pub use automaton::Automaton;
pub use error::{DesError, Result};
