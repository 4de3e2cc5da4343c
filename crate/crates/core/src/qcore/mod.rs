//! Small-register statevector engine.
//!
//! Dense amplitude vectors over at most [`MAX_QUBITS`] qubits, the bases the
//! protocol measures in, qubit permutations and projective measurement.

mod basis;
mod measure;
mod permutation;
mod register;
mod state;

pub use basis::{BasisKind, OrthonormalBasis};
pub use measure::{
    branches, embed, measure, outcome_distribution, project_onto, Branch, MeasurementRecord,
    PROBABILITY_CUTOFF,
};
pub use permutation::PermutationMap;
pub use register::{FactoredRegister, QubitId};
pub use state::{format_bits, parse_bits, StateVector};

/// Tolerance for exact-algebra comparisons.
pub const TOLERANCE: f64 = 1e-12;

/// Largest dense register the engine will allocate.
pub const MAX_QUBITS: usize = 16;

/// `a ⊗ b`.
pub fn tensor(a: &StateVector, b: &StateVector) -> crate::Result<StateVector> {
    a.tensor(b)
}

/// Applies `perm` to the register positions of `s`.
pub fn permute_qubits(s: &StateVector, perm: &PermutationMap) -> crate::Result<StateVector> {
    s.permute_qubits(perm)
}

pub fn inner_product(a: &StateVector, b: &StateVector) -> crate::Result<num_complex::Complex64> {
    a.inner_product(b)
}

pub fn bell_basis() -> OrthonormalBasis {
    OrthonormalBasis::bell()
}

pub fn cat_basis(k: usize) -> crate::Result<OrthonormalBasis> {
    OrthonormalBasis::cat(k)
}
