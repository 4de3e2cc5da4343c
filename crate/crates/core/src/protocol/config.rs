use crate::error::{Error, Result};
use crate::states::StateFamily;

/// Shape parameters of one protocol session.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub family: StateFamily,
    /// Number of carrier copies `N`.
    pub copies: usize,
    /// `|ψ⁺⟩` decoy pairs; `None` means `⌈N·l/2⌉`.
    pub decoy_pairs: Option<usize>,
    /// Largest tolerated decoy error rate.
    pub error_threshold: f64,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(family: StateFamily, copies: usize) -> Self {
        Self {
            family,
            copies,
            decoy_pairs: None,
            error_threshold: 0.0,
            seed: 0,
        }
    }

    pub fn with_decoy_pairs(mut self, pairs: usize) -> Self {
        self.decoy_pairs = Some(pairs);
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.error_threshold = threshold;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn decoy_pair_count(&self) -> usize {
        self.decoy_pairs
            .unwrap_or_else(|| (self.copies * self.family.spec.l).div_ceil(2))
    }

    pub fn carrier_qubits(&self) -> usize {
        self.copies * self.family.spec.l
    }

    /// Length of the permuted sequence sent to Bob.
    pub fn transmitted_qubits(&self) -> usize {
        self.carrier_qubits() + 2 * self.decoy_pair_count()
    }

    /// Message capacity in bits.
    pub fn capacity(&self) -> usize {
        self.copies * self.family.spec.n
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.error_threshold) {
            return Err(Error::Contract(format!(
                "error threshold {} outside [0, 1]",
                self.error_threshold
            )));
        }
        Ok(())
    }
}
