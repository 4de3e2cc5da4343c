use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{OrthonormalBasis, StateVector};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Outcomes below this probability are treated as impossible during enumeration.
pub const PROBABILITY_CUTOFF: f64 = 1e-12;

/// Result of one projective measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub basis_label: String,
    pub outcome_index: usize,
    pub outcome_label: String,
    pub probability: f64,
    pub qubit_indices: Vec<usize>,
}

/// One outcome of a projective measurement, with the normalized state left on
/// the unmeasured qubits (in their original relative order).
#[derive(Clone, Debug)]
pub struct Branch {
    pub outcome: usize,
    pub probability: f64,
    pub remainder: Option<StateVector>,
}

/// Index bookkeeping for splitting a register into measured and remaining qubits.
struct Layout {
    measured: Vec<usize>,
    rest: Vec<usize>,
    rest_qubits: Vec<usize>,
}

impl Layout {
    fn new(num_qubits: usize, qubits: &[usize]) -> Result<Self> {
        let mut seen = vec![false; num_qubits];
        for &q in qubits {
            if q >= num_qubits {
                return Err(Error::Contract(format!(
                    "qubit {q} out of range for a {num_qubits}-qubit register"
                )));
            }
            if seen[q] {
                return Err(Error::Contract(format!("qubit {q} listed twice")));
            }
            seen[q] = true;
        }
        let rest_qubits: Vec<usize> = (0..num_qubits).filter(|q| !seen[*q]).collect();
        let offsets = |group: &[usize]| -> Vec<usize> {
            let k = group.len();
            (0..1usize << k)
                .map(|x| {
                    group.iter().enumerate().fold(0usize, |acc, (pos, &q)| {
                        let bit = (x >> (k - 1 - pos)) & 1;
                        acc | (bit << (num_qubits - 1 - q))
                    })
                })
                .collect()
        };
        Ok(Self {
            measured: offsets(qubits),
            rest: offsets(&rest_qubits),
            rest_qubits,
        })
    }

    /// `(⟨element| ⊗ I) |s⟩` as an unnormalized vector over the remaining qubits.
    fn contract(&self, s: &StateVector, element: &StateVector) -> Vec<Complex64> {
        let amps = s.amplitudes();
        let e = element.amplitudes();
        self.rest
            .iter()
            .map(|&r| {
                self.measured
                    .iter()
                    .zip(e)
                    .map(|(&x, ex)| ex.conj() * amps[x | r])
                    .sum()
            })
            .collect()
    }
}

fn check_basis(qubits: &[usize], basis: &OrthonormalBasis) -> Result<()> {
    if qubits.len() != basis.num_qubits() {
        return Err(Error::Contract(format!(
            "{} qubits measured in the {}-qubit basis `{}`",
            qubits.len(),
            basis.num_qubits(),
            basis.name()
        )));
    }
    Ok(())
}

/// Exact Born probabilities of every basis element, in basis order.
pub fn outcome_distribution(
    s: &StateVector,
    qubits: &[usize],
    basis: &OrthonormalBasis,
) -> Result<Vec<f64>> {
    check_basis(qubits, basis)?;
    let layout = Layout::new(s.num_qubits(), qubits)?;
    Ok(basis
        .elements()
        .iter()
        .map(|e| layout.contract(s, e).iter().map(|a| a.norm_sqr()).sum())
        .collect())
}

/// Every outcome with probability above [`PROBABILITY_CUTOFF`].
pub fn branches(s: &StateVector, qubits: &[usize], basis: &OrthonormalBasis) -> Result<Vec<Branch>> {
    check_basis(qubits, basis)?;
    let layout = Layout::new(s.num_qubits(), qubits)?;
    let mut out = Vec::new();
    for (outcome, e) in basis.elements().iter().enumerate() {
        let amps = layout.contract(s, e);
        let probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if probability <= PROBABILITY_CUTOFF {
            continue;
        }
        let remainder = if layout.rest_qubits.is_empty() {
            None
        } else {
            Some(StateVector::from_unnormalized(layout.rest_qubits.len(), amps)?)
        };
        out.push(Branch {
            outcome,
            probability,
            remainder,
        });
    }
    Ok(out)
}

/// Normalized state of the unmeasured qubits after projecting `qubits` onto `element`,
/// together with the probability of that projection. `None` when the projection vanishes.
pub fn project_onto(
    s: &StateVector,
    qubits: &[usize],
    element: &StateVector,
) -> Result<Option<(f64, Option<StateVector>)>> {
    if qubits.len() != element.num_qubits() {
        return Err(Error::Contract("element size does not match qubit list".into()));
    }
    let layout = Layout::new(s.num_qubits(), qubits)?;
    let amps = layout.contract(s, element);
    let probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if probability <= PROBABILITY_CUTOFF {
        return Ok(None);
    }
    let remainder = if layout.rest_qubits.is_empty() {
        None
    } else {
        Some(StateVector::from_unnormalized(layout.rest_qubits.len(), amps)?)
    };
    Ok(Some((probability, remainder)))
}

/// Rebuilds a full register with `element` on `qubits` and `remainder` on the rest.
pub fn embed(
    num_qubits: usize,
    qubits: &[usize],
    element: &StateVector,
    remainder: Option<&StateVector>,
) -> Result<StateVector> {
    let layout = Layout::new(num_qubits, qubits)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
    let rest_amps: Vec<Complex64> = match remainder {
        Some(r) => r.amplitudes().to_vec(),
        None => vec![Complex64::new(1.0, 0.0)],
    };
    if rest_amps.len() != layout.rest.len() {
        return Err(Error::Contract("remainder does not fit the register".into()));
    }
    for (&x, ex) in layout.measured.iter().zip(element.amplitudes()) {
        for (&r, rr) in layout.rest.iter().zip(&rest_amps) {
            amps[x | r] = ex * rr;
        }
    }
    StateVector::new(num_qubits, amps)
}

/// Samples a projective measurement of `qubits` in `basis` by the Born rule.
///
/// Returns the record and the normalized post-measurement state of the whole register.
pub fn measure(
    s: &StateVector,
    qubits: &[usize],
    basis: &OrthonormalBasis,
    rng: &mut RandomStream,
) -> Result<(MeasurementRecord, StateVector)> {
    let (record, element, remainder) = sample(s, qubits, basis, rng)?;
    let post = embed(s.num_qubits(), qubits, &element, remainder.as_ref())?;
    Ok((record, post))
}

/// Like [`measure`] but returns only the state left on the unmeasured qubits.
pub(crate) fn sample(
    s: &StateVector,
    qubits: &[usize],
    basis: &OrthonormalBasis,
    rng: &mut RandomStream,
) -> Result<(MeasurementRecord, StateVector, Option<StateVector>)> {
    let options = branches(s, qubits, basis)?;
    let total: f64 = options.iter().map(|b| b.probability).sum();
    if options.is_empty() || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Internal(format!(
            "outcome probabilities in basis `{}` sum to {total}",
            basis.name()
        )));
    }
    let u = rng.uniform() * total;
    let mut acc = 0.0;
    let mut chosen = options.len() - 1;
    for (k, b) in options.iter().enumerate() {
        acc += b.probability;
        if u < acc {
            chosen = k;
            break;
        }
    }
    let branch = options.into_iter().nth(chosen).expect("chosen branch");
    let record = MeasurementRecord {
        basis_label: basis.name().to_string(),
        outcome_index: branch.outcome,
        outcome_label: basis.label(branch.outcome).to_string(),
        probability: branch.probability,
        qubit_indices: qubits.to_vec(),
    };
    Ok((record, basis.element(branch.outcome).clone(), branch.remainder))
}
