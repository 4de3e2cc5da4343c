//! Eavesdropping on the quantum channel: measure-and-resend, CNOT copying and
//! capture-and-replace, with exact and sampled decoy-failure probabilities.

mod detection;
mod strategy;

pub use detection::{
    cross_paired_bell_exact, cross_paired_bell_mc, detection_probability_exact,
    detection_probability_mc, McEstimate,
};
pub use strategy::{apply_attack, AttackStrategy, EveRecord, ResendBasis};
