use thiserror::Error;

use crate::qcore::MAX_QUBITS;

/// Errors raised by the simulator and the protocol layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (size mismatch, bad index, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("register of {0} qubits exceeds the {MAX_QUBITS}-qubit cap")]
    RegisterTooLarge(usize),

    /// A state-family description violates the dimension or selection rules.
    #[error("invalid state specification: {0}")]
    Spec(String),

    #[error("unknown catalog state `{0}`")]
    UnknownState(String),

    /// Two different messages produce the same (announcement, Bob outcome) triple.
    #[error("decode table is ambiguous: ({first}, {second}, {bob}) maps to both {existing} and {conflicting}")]
    AmbiguousDecoding {
        first: String,
        second: String,
        bob: String,
        existing: u32,
        conflicting: u32,
    },

    /// Bob observed a triple that no honest run can produce.
    #[error("protocol corruption: no decode entry for ({first}, {second}, {bob})")]
    Corruption {
        first: String,
        second: String,
        bob: String,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
