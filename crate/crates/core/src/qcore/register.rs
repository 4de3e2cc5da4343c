use serde::{Deserialize, Serialize};

use super::measure::{outcome_distribution, sample};
use super::{MeasurementRecord, OrthonormalBasis, StateVector, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Stable name of a qubit inside a [`FactoredRegister`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitId(pub usize);

#[derive(Clone, Debug)]
struct Block {
    qubits: Vec<QubitId>,
    state: StateVector,
}

/// A many-qubit pure state stored as a product of small dense factors.
///
/// Factors are merged only when an operation couples them and measured qubits
/// are split back out, so a protocol run over many carrier copies stays within
/// the dense-register cap as long as no single entangled cluster exceeds it.
#[derive(Clone, Debug, Default)]
pub struct FactoredRegister {
    blocks: Vec<Option<Block>>,
    location: Vec<usize>,
}

impl FactoredRegister {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_qubits(&self) -> usize {
        self.location.len()
    }

    /// Adds an independent factor and returns ids for its qubits, in register order.
    pub fn add(&mut self, state: StateVector) -> Vec<QubitId> {
        let block = self.blocks.len();
        let ids: Vec<QubitId> = (0..state.num_qubits())
            .map(|k| QubitId(self.location.len() + k))
            .collect();
        self.location.extend(std::iter::repeat_n(block, ids.len()));
        self.blocks.push(Some(Block {
            qubits: ids.clone(),
            state,
        }));
        ids
    }

    fn check(&self, id: QubitId) -> Result<()> {
        if id.0 >= self.location.len() {
            return Err(Error::Contract(format!("unknown qubit {}", id.0)));
        }
        Ok(())
    }

    /// Merges every factor touching `ids` into one block and returns its slot.
    fn merge(&mut self, ids: &[QubitId]) -> Result<usize> {
        let mut slots: Vec<usize> = Vec::new();
        for &id in ids {
            self.check(id)?;
            let slot = self.location[id.0];
            if !slots.contains(&slot) {
                slots.push(slot);
            }
        }
        let target = *slots
            .first()
            .ok_or_else(|| Error::Contract("no qubits given".into()))?;
        if slots.len() == 1 {
            return Ok(target);
        }
        let total: usize = slots
            .iter()
            .map(|&s| self.blocks[s].as_ref().map_or(0, |b| b.qubits.len()))
            .sum();
        if total > MAX_QUBITS {
            return Err(Error::RegisterTooLarge(total));
        }
        let mut merged = self.blocks[target].take().expect("live block");
        for &slot in &slots[1..] {
            let other = self.blocks[slot].take().expect("live block");
            merged.state = merged.state.tensor(&other.state)?;
            merged.qubits.extend(other.qubits);
        }
        for q in &merged.qubits {
            self.location[q.0] = target;
        }
        self.blocks[target] = Some(merged);
        Ok(target)
    }

    fn positions(&self, slot: usize, ids: &[QubitId]) -> Vec<usize> {
        let block = self.blocks[slot].as_ref().expect("live block");
        ids.iter()
            .map(|id| block.qubits.iter().position(|q| q == id).expect("merged qubit"))
            .collect()
    }

    /// Projective measurement of `ids` in `basis`. The measured qubits are left
    /// as their own factor holding the observed basis element.
    pub fn measure(
        &mut self,
        ids: &[QubitId],
        basis: &OrthonormalBasis,
        rng: &mut RandomStream,
    ) -> Result<MeasurementRecord> {
        let slot = self.merge(ids)?;
        let positions = self.positions(slot, ids);
        let block = self.blocks[slot].take().expect("live block");
        let (mut record, element, remainder) = sample(&block.state, &positions, basis, rng)?;
        record.qubit_indices = ids.iter().map(|q| q.0).collect();
        if let Some(rest) = remainder {
            let qubits = block
                .qubits
                .iter()
                .filter(|q| !ids.contains(q))
                .copied()
                .collect();
            self.blocks[slot] = Some(Block { qubits, state: rest });
        }
        let fresh = self.blocks.len();
        for q in ids {
            self.location[q.0] = fresh;
        }
        self.blocks.push(Some(Block {
            qubits: ids.to_vec(),
            state: element,
        }));
        Ok(record)
    }

    /// Exact Born distribution for measuring `ids` in `basis`, without collapsing.
    pub fn distribution(&mut self, ids: &[QubitId], basis: &OrthonormalBasis) -> Result<Vec<f64>> {
        let slot = self.merge(ids)?;
        let positions = self.positions(slot, ids);
        let block = self.blocks[slot].as_ref().expect("live block");
        outcome_distribution(&block.state, &positions, basis)
    }

    pub fn cnot(&mut self, control: QubitId, target: QubitId) -> Result<()> {
        let slot = self.merge(&[control, target])?;
        let pos = self.positions(slot, &[control, target]);
        let block = self.blocks[slot].as_mut().expect("live block");
        block.state = block.state.cnot(pos[0], pos[1])?;
        Ok(())
    }

    /// Joint state of the factor containing `ids`, reordered so `ids` come first.
    ///
    /// Returns the full qubit order of the returned state.
    pub fn joint_state(&mut self, ids: &[QubitId]) -> Result<(Vec<QubitId>, StateVector)> {
        let slot = self.merge(ids)?;
        let block = self.blocks[slot].as_ref().expect("live block");
        let mut order: Vec<QubitId> = ids.to_vec();
        order.extend(block.qubits.iter().filter(|q| !ids.contains(q)));
        let positions: Vec<usize> = order
            .iter()
            .map(|id| block.qubits.iter().position(|q| q == id).expect("merged qubit"))
            .collect();
        Ok((order, block.state.reorder(&positions)?))
    }

    /// Size of the largest live factor.
    pub fn largest_factor(&self) -> usize {
        self.blocks
            .iter()
            .flatten()
            .map(|b| b.qubits.len())
            .max()
            .unwrap_or(0)
    }
}
