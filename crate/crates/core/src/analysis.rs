//! Qubit efficiency and the announcement-leakage audit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::announcement_distribution;
use crate::qcore::StateVector;
use crate::states::StateFamily;

/// What `q` counts in `η = c/(q+b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Every qubit prepared: the carrier and the encoding cat state.
    TotalQubits,
    /// Only qubits that cross the channel, decoys excluded.
    TransmittedQubits,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::TotalQubits, Convention::TransmittedQubits];
}

/// Per-copy accounting of `η = c/(q+b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    /// Message bits.
    pub c: usize,
    pub q: usize,
    /// Classical bits Alice announces for decoding.
    pub b: usize,
    pub eta: f64,
    pub convention: Convention,
}

/// Qubit efficiency of one carrier copy. `b = 2m` counts only the announcement;
/// decoy-check traffic is excluded.
pub fn efficiency(m: usize, l: usize, n: usize, convention: Convention) -> Result<EfficiencyReport> {
    if n < 1 || m < n || l < n || m < 2 {
        return Err(Error::Spec(format!(
            "(m, l, n) = ({m}, {l}, {n}) violates m ≥ n, l ≥ n ≥ 1, m ≥ 2"
        )));
    }
    let q = match convention {
        Convention::TotalQubits => 2 * m + 2 * l,
        Convention::TransmittedQubits => 2 * l,
    };
    let b = 2 * m;
    Ok(EfficiencyReport {
        c: n,
        q,
        b,
        eta: n as f64 / (q + b) as f64,
        convention,
    })
}

/// Total-variation distance between two distributions over the same key type.
fn total_variation<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let keys: BTreeSet<&K> = p.keys().chain(q.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// Largest total-variation distance between the announcement distributions that
/// the `encodings` produce on `psi`. Zero means the announcement alone says nothing
/// about which encoding was used.
pub fn announcement_leakage(psi: &StateVector, encodings: &[StateVector], m: usize) -> Result<f64> {
    let dists = encodings
        .iter()
        .map(|e| announcement_distribution(psi, e, m))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for (i, p) in dists.iter().enumerate() {
        for q in &dists[i + 1..] {
            worst = worst.max(total_variation(p, q));
        }
    }
    Ok(worst)
}

/// [`announcement_leakage`] over every message of `family`.
pub fn leakage_audit(family: &StateFamily) -> Result<f64> {
    let encodings = (0..family.spec.message_count())
        .map(|j| family.encoding_state(j).cloned())
        .collect::<Result<Vec<_>>>()?;
    announcement_leakage(&family.state()?, &encodings, family.spec.m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::OrthonormalBasis;
    use crate::states::{named_state, CATALOG};
    use num_complex::Complex64;

    #[test]
    fn ghz_like_total_is_one_tenth() {
        let r = efficiency(2, 1, 1, Convention::TotalQubits).unwrap();
        assert_eq!((r.c, r.q, r.b), (1, 6, 4));
        assert_eq!(r.eta, 0.1);
    }

    #[test]
    fn equal_dimensions_give_sixth_and_quarter() {
        for k in 2..=6 {
            assert_eq!(efficiency(k, k, k, Convention::TotalQubits).unwrap().eta, 1.0 / 6.0);
            assert_eq!(efficiency(k, k, k, Convention::TransmittedQubits).unwrap().eta, 0.25);
        }
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(efficiency(1, 1, 1, Convention::TotalQubits).is_err());
        assert!(efficiency(2, 1, 2, Convention::TotalQubits).is_err());
    }

    #[test]
    fn announcements_of_even_m_catalog_states_do_not_leak() {
        for name in CATALOG.iter().filter(|n| **n != "brown-swapped") {
            let family = named_state(name).unwrap().family;
            assert!(leakage_audit(&family).unwrap() <= 1e-12, "{name}");
        }
    }

    #[test]
    fn brown_swapped_second_set_reveals_a_parity() {
        // the 4-qubit measurement sees two qubits of |e_j⟩ and so learns q1 ⊕ q2 of its
        // representative, which differs between G010/G001 and G111/G100
        let family = named_state("brown-swapped").unwrap().family;
        assert!((leakage_audit(&family).unwrap() - 1.0).abs() < 1e-12);
    }

    fn two_term(e: (usize, usize), f: (&StateVector, &StateVector), weights: (f64, f64)) -> StateVector {
        let bell = OrthonormalBasis::bell();
        let a = bell.element(e.0).tensor(f.0).unwrap();
        let b = bell.element(e.1).tensor(f.1).unwrap();
        let w = |x: f64| Complex64::new(x, 0.0);
        StateVector::superpose(&[(w(weights.0), &a), (w(weights.1), &b)]).unwrap()
    }

    #[test]
    fn unequal_weights_leak() {
        let bell = OrthonormalBasis::bell();
        let zero = StateVector::from_bits("0").unwrap();
        let one = StateVector::from_bits("1").unwrap();
        let psi = two_term((0, 1), (&zero, &one), (1.0, 0.5));
        let encodings = [bell.element(0).clone(), bell.element(1).clone()];
        // weights 0.8 / 0.2 are swapped between the two encodings
        assert!((announcement_leakage(&psi, &encodings, 2).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn overlapping_f_alone_does_not_leak_at_m_two() {
        // the cat-basis diagonal of Alice's half is |c_i|² whatever the f overlaps
        let bell = OrthonormalBasis::bell();
        let zero = StateVector::from_bits("0").unwrap();
        let plus = OrthonormalBasis::hadamard(1).unwrap().element(0).clone();
        let psi = two_term((0, 1), (&zero, &plus), (1.0, 1.0));
        let encodings = [bell.element(0).clone(), bell.element(1).clone()];
        assert!(announcement_leakage(&psi, &encodings, 2).unwrap() <= 1e-12);
    }
}
