//! Simulator for deterministic secure quantum communication over generalized
//! entanglement swapping.
//!
//! Alice keeps the cat-state half of each carrier `(1/√2ⁿ) Σ |e_i⟩|f_i⟩`, ships
//! the `f` half to Bob hidden among permuted `|ψ⁺⟩` decoy pairs, and later
//! encodes a message `j` by preparing a fresh `|e_j⟩` and swapping entanglement
//! onto Bob's qubits. The message qubits themselves never travel.
//!
//! Modules, bottom up:
//! - [`qcore`]: dense statevectors, bases, permutations, measurement.
//! - [`states`]: the carrier state family and its catalog.
//! - [`protocol`]: the Alice/Bob session, decode tables and transcripts.
//! - [`adversary`]: eavesdropping attacks and detection-probability estimators.
//! - [`analysis`]: qubit efficiency and announcement leakage.

pub mod adversary;
pub mod analysis;
pub mod error;
pub mod protocol;
pub mod qcore;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
pub use rng::RandomStream;
