use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{branches, outcome_distribution, OrthonormalBasis, StateVector, PROBABILITY_CUTOFF};
use crate::states::StateFamily;

/// Size `p` of Alice's first measurement set per cat state: `m/2`, rounded down.
pub fn first_set_width(m: usize) -> usize {
    m / 2
}

/// Register positions of the two swap-measurement sets in `|e_j⟩|e_i⟩…`.
///
/// The first set holds the leading `p` qubits of each cat state, the second set
/// the remaining `m − p` of each; `|e_j⟩` qubits come first within each set.
pub fn swap_sets(m: usize) -> (Vec<usize>, Vec<usize>) {
    let p = first_set_width(m);
    let first = (0..p).chain(m..m + p).collect();
    let second = (p..m).chain(m + p..2 * m).collect();
    (first, second)
}

/// Cat bases for the two sets; two-qubit sets use Bell labels.
pub fn swap_bases(m: usize) -> Result<(OrthonormalBasis, OrthonormalBasis)> {
    let p = first_set_width(m);
    Ok((
        OrthonormalBasis::cat_or_bell(2 * p)?,
        OrthonormalBasis::cat_or_bell(2 * (m - p))?,
    ))
}

/// `|e_j⟩ ⊗ |ψ⟩`: Alice's fresh encoding state ahead of the carrier.
pub fn combined_state(family: &StateFamily, j: usize) -> Result<StateVector> {
    family.encoding_state(j)?.tensor(&family.state()?)
}

/// Positions of `wanted` after the qubits in `removed` are dropped from an `n`-qubit register.
pub(crate) fn shifted_positions(wanted: &[usize], removed: &[usize]) -> Vec<usize> {
    wanted
        .iter()
        .map(|&q| q - removed.iter().filter(|&&r| r < q).count())
        .collect()
}

/// Alice's two announced outcomes and Bob's outcome.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DecodeKey {
    pub first: String,
    pub second: String,
    pub bob: String,
}

/// Exact joint distribution of `(first, second, bob)` when the carrier `psi`
/// (`m` cat-side qubits, then Bob's qubits) is combined with `encoding`.
pub fn outcome_triples(
    psi: &StateVector,
    encoding: &StateVector,
    m: usize,
    bob_basis: &OrthonormalBasis,
) -> Result<Vec<(DecodeKey, f64)>> {
    if encoding.num_qubits() != m || psi.num_qubits() != m + bob_basis.num_qubits() {
        return Err(Error::Contract("carrier, encoding and Bob basis sizes disagree".into()));
    }
    let combined = encoding.tensor(psi)?;
    let (first, second) = swap_sets(m);
    let (first_basis, second_basis) = swap_bases(m)?;
    let second_pos = shifted_positions(&second, &first);
    let mut out = Vec::new();
    for a1 in branches(&combined, &first, &first_basis)? {
        let rest = a1.remainder.as_ref().expect("second set and Bob remain");
        for a2 in branches(rest, &second_pos, &second_basis)? {
            let bob = a2.remainder.as_ref().expect("Bob's qubits remain");
            let all: Vec<usize> = (0..bob.num_qubits()).collect();
            for (b, pb) in outcome_distribution(bob, &all, bob_basis)?.into_iter().enumerate() {
                let p = a1.probability * a2.probability * pb;
                if p > PROBABILITY_CUTOFF {
                    out.push((
                        DecodeKey {
                            first: first_basis.label(a1.outcome).to_string(),
                            second: second_basis.label(a2.outcome).to_string(),
                            bob: bob_basis.label(b).to_string(),
                        },
                        p,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Exact distribution of Alice's announcement pair for one encoding.
pub fn announcement_distribution(
    psi: &StateVector,
    encoding: &StateVector,
    m: usize,
) -> Result<BTreeMap<(String, String), f64>> {
    if encoding.num_qubits() != m || psi.num_qubits() <= m {
        return Err(Error::Contract("carrier and encoding sizes disagree".into()));
    }
    let combined = encoding.tensor(psi)?;
    let (first, second) = swap_sets(m);
    let (first_basis, second_basis) = swap_bases(m)?;
    let second_pos = shifted_positions(&second, &first);
    let mut out = BTreeMap::new();
    for a1 in branches(&combined, &first, &first_basis)? {
        let rest = a1.remainder.as_ref().expect("second set remains");
        for (k, p) in outcome_distribution(rest, &second_pos, &second_basis)?
            .into_iter()
            .enumerate()
        {
            let joint = a1.probability * p;
            if joint > PROBABILITY_CUTOFF {
                *out.entry((
                    first_basis.label(a1.outcome).to_string(),
                    second_basis.label(k).to_string(),
                ))
                .or_insert(0.0) += joint;
            }
        }
    }
    Ok(out)
}

/// One row of a decode table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeRow {
    pub first: String,
    pub second: String,
    pub bob: String,
    pub message: u32,
}

/// Map from announcement plus Bob's outcome to the encoded message.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeTable {
    entries: BTreeMap<DecodeKey, u32>,
}

impl DecodeTable {
    pub fn lookup(&self, first: &str, second: &str, bob: &str) -> Option<u32> {
        self.entries
            .get(&DecodeKey {
                first: first.to_string(),
                second: second.to_string(),
                bob: bob.to_string(),
            })
            .copied()
    }

    pub fn decode(&self, first: &str, second: &str, bob: &str) -> Result<u32> {
        self.lookup(first, second, bob).ok_or_else(|| Error::Corruption {
            first: first.to_string(),
            second: second.to_string(),
            bob: bob.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rows sorted by key.
    pub fn rows(&self) -> Vec<DecodeRow> {
        self.entries
            .iter()
            .map(|(k, &message)| DecodeRow {
                first: k.first.clone(),
                second: k.second.clone(),
                bob: k.bob.clone(),
                message,
            })
            .collect()
    }

    fn insert(&mut self, key: DecodeKey, message: u32) -> Result<()> {
        match self.entries.get(&key) {
            Some(&existing) if existing != message => Err(Error::AmbiguousDecoding {
                first: key.first,
                second: key.second,
                bob: key.bob,
                existing,
                conflicting: message,
            }),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(key, message);
                Ok(())
            }
        }
    }
}

/// Enumerates every possible outcome triple for every message and records which
/// message produced it. Fails if two messages share a triple.
pub fn build_decode_table(family: &StateFamily) -> Result<DecodeTable> {
    let psi = family.state()?;
    let m = family.spec.m;
    let mut table = DecodeTable::default();
    for j in 0..family.spec.message_count() {
        let encoding = family.encoding_state(j)?;
        for (key, _) in outcome_triples(&psi, encoding, m, family.f_basis())? {
            table.insert(key, j as u32)?;
        }
    }
    Ok(table)
}
