//! The carrier state family `(1/√2ⁿ) Σᵢ |eᵢ⟩|fᵢ⟩` with cat-state `|eᵢ⟩`.
//!
//! A family is described by a [`GenericFormSpec`] (dimensions plus which basis
//! elements are paired) and the two bases it indexes into. The catalog holds
//! eight well-known members; [`verify_generic_form`] decides membership for an
//! arbitrary state through its Schmidt decomposition.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{project_onto, BasisKind, OrthonormalBasis, StateVector, MAX_QUBITS};

/// Schmidt coefficients closer than this count as equal (SVD noise exceeds amplitude noise).
pub const SCHMIDT_TOLERANCE: f64 = 1e-9;

/// Catalog names, in table order.
pub const CATALOG: [&str; 8] = [
    "cluster",
    "cluster-swapped",
    "cat4",
    "ghz",
    "ghz-like",
    "brown-swapped",
    "chi",
    "omega",
];

/// Index into a basis with an optional `−1` phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedIndex {
    pub index: usize,
    pub negative: bool,
}

impl SignedIndex {
    pub fn plus(index: usize) -> Self {
        Self {
            index,
            negative: false,
        }
    }

    pub fn minus(index: usize) -> Self {
        Self {
            index,
            negative: true,
        }
    }

    fn sign(self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }
}

/// Dimensions and pairings of one state of the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericFormSpec {
    /// Qubits per `|eᵢ⟩`.
    pub m: usize,
    /// Qubits per `|fᵢ⟩`.
    pub l: usize,
    /// Message bits per carrier.
    pub n: usize,
    pub e_selection: Vec<usize>,
    pub f_selection: Vec<SignedIndex>,
}

impl GenericFormSpec {
    pub fn validate(&self) -> Result<()> {
        let (m, l, n) = (self.m, self.l, self.n);
        if n < 1 || m < n || l < n || m < 2 {
            return Err(Error::Spec(format!(
                "(m, l, n) = ({m}, {l}, {n}) violates m ≥ n, l ≥ n ≥ 1, m ≥ 2"
            )));
        }
        if m + l > MAX_QUBITS {
            return Err(Error::RegisterTooLarge(m + l));
        }
        let count = 1usize << n;
        if self.e_selection.len() != count || self.f_selection.len() != count {
            return Err(Error::Spec(format!(
                "n = {n} needs {count} e and f selections, got {} and {}",
                self.e_selection.len(),
                self.f_selection.len()
            )));
        }
        let distinct = |xs: Vec<usize>, dim: usize, what: &str| -> Result<()> {
            let mut seen = vec![false; dim];
            for x in xs {
                if x >= dim {
                    return Err(Error::Spec(format!("{what} index {x} out of range {dim}")));
                }
                if seen[x] {
                    return Err(Error::Spec(format!("duplicate {what} selection {x}")));
                }
                seen[x] = true;
            }
            Ok(())
        };
        distinct(self.e_selection.clone(), 1 << m, "e")?;
        distinct(
            self.f_selection.iter().map(|s| s.index).collect(),
            1 << l,
            "f",
        )?;
        Ok(())
    }

    pub fn message_count(&self) -> usize {
        1 << self.n
    }
}

/// Builds `(1/√2ⁿ) Σᵢ ±|e_{sel(i)}⟩|f_{sel(i)}⟩`, `|e⟩` on register positions `0..m`.
pub fn build_generic(
    spec: &GenericFormSpec,
    e_basis: &OrthonormalBasis,
    f_basis: &OrthonormalBasis,
) -> Result<StateVector> {
    spec.validate()?;
    if e_basis.num_qubits() != spec.m || f_basis.num_qubits() != spec.l {
        return Err(Error::Spec(format!(
            "bases span ({}, {}) qubits but the spec asks for (m, l) = ({}, {})",
            e_basis.num_qubits(),
            f_basis.num_qubits(),
            spec.m,
            spec.l
        )));
    }
    for &e in &spec.e_selection {
        if !e_basis.element(e).is_cat_state(1e-12) {
            return Err(Error::Spec(format!(
                "e element `{}` is not a cat state; only cat-state e bases are supported",
                e_basis.label(e)
            )));
        }
    }
    let weight = (spec.message_count() as f64).sqrt().recip();
    let dim = 1usize << (spec.m + spec.l);
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (&e, f) in spec.e_selection.iter().zip(&spec.f_selection) {
        let term = e_basis.element(e).tensor(f_basis.element(f.index))?;
        let c = weight * f.sign();
        for (acc, a) in amps.iter_mut().zip(term.amplitudes()) {
            *acc += c * a;
        }
    }
    StateVector::new(spec.m + spec.l, amps)
}

/// A member of the family together with the bases its selections refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct StateFamily {
    pub name: String,
    pub spec: GenericFormSpec,
    pub e_kind: BasisKind,
    pub f_kind: BasisKind,
    e_basis: OrthonormalBasis,
    f_basis: OrthonormalBasis,
}

impl StateFamily {
    pub fn new(
        name: impl Into<String>,
        spec: GenericFormSpec,
        e_kind: BasisKind,
        f_kind: BasisKind,
    ) -> Result<Self> {
        spec.validate()?;
        let e_basis = e_kind.build(spec.m)?;
        let f_basis = f_kind.build(spec.l)?;
        let family = Self {
            name: name.into(),
            spec,
            e_kind,
            f_kind,
            e_basis,
            f_basis,
        };
        family.state()?;
        Ok(family)
    }

    pub fn e_basis(&self) -> &OrthonormalBasis {
        &self.e_basis
    }

    pub fn f_basis(&self) -> &OrthonormalBasis {
        &self.f_basis
    }

    pub fn state(&self) -> Result<StateVector> {
        build_generic(&self.spec, &self.e_basis, &self.f_basis)
    }

    /// The cat state Alice prepares to send message `j`.
    pub fn encoding_state(&self, j: usize) -> Result<&StateVector> {
        let index = self.spec.e_selection.get(j).ok_or_else(|| {
            Error::Contract(format!(
                "message {j} out of range for n = {}",
                self.spec.n
            ))
        })?;
        Ok(self.e_basis.element(*index))
    }

    pub fn from_document(doc: &SpecDocument) -> Result<Self> {
        let e_basis = doc.e_basis.build(doc.m)?;
        let f_basis = doc.f_basis.build(doc.l)?;
        let e_selection = doc
            .e
            .iter()
            .map(|label| {
                e_basis
                    .index_of(label)
                    .ok_or_else(|| Error::Spec(format!("unknown e label `{label}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let f_selection = doc
            .f
            .iter()
            .map(|label| parse_signed_label(&f_basis, label))
            .collect::<Result<Vec<_>>>()?;
        let spec = GenericFormSpec {
            m: doc.m,
            l: doc.l,
            n: doc.n,
            e_selection,
            f_selection,
        };
        Self::new(
            doc.name.clone().unwrap_or_else(|| "custom".into()),
            spec,
            doc.e_basis,
            doc.f_basis,
        )
    }

    pub fn to_document(&self) -> SpecDocument {
        SpecDocument {
            name: Some(self.name.clone()),
            m: self.spec.m,
            l: self.spec.l,
            n: self.spec.n,
            e_basis: self.e_kind,
            e: self
                .spec
                .e_selection
                .iter()
                .map(|&i| self.e_basis.label(i).to_string())
                .collect(),
            f_basis: self.f_kind,
            f: self
                .spec
                .f_selection
                .iter()
                .map(|s| {
                    let label = self.f_basis.label(s.index);
                    if s.negative {
                        format!("-{label}")
                    } else {
                        label.to_string()
                    }
                })
                .collect(),
        }
    }
}

fn parse_signed_label(basis: &OrthonormalBasis, label: &str) -> Result<SignedIndex> {
    if let Some(i) = basis.index_of(label) {
        return Ok(SignedIndex::plus(i));
    }
    label
        .strip_prefix('-')
        .and_then(|rest| basis.index_of(rest))
        .map(SignedIndex::minus)
        .ok_or_else(|| Error::Spec(format!("unknown f label `{label}`")))
}

/// File form of a family description: dimensions, the two basis kinds and the
/// selected element labels. A leading `-` on an f label flips that term's sign.
///
/// ```json
/// {"m": 2, "l": 2, "n": 2, "e_basis": "bell", "e": ["psi+", "psi-", "phi+", "phi-"],
///  "f_basis": "bell", "f": ["psi-", "psi+", "phi+", "-phi-"]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub m: usize,
    pub l: usize,
    pub n: usize,
    pub e_basis: BasisKind,
    pub e: Vec<String>,
    pub f_basis: BasisKind,
    pub f: Vec<String>,
}

/// A catalog entry.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedState {
    pub family: StateFamily,
    pub vector: StateVector,
}

impl NamedState {
    pub fn name(&self) -> &str {
        &self.family.name
    }
}

/// Looks up one of the eight catalog states.
pub fn named_state(name: &str) -> Result<NamedState> {
    use BasisKind::{Bell, Cat, Computational, Hadamard};
    let p = SignedIndex::plus;
    let n = SignedIndex::minus;
    let (m, l, bits, e_kind, e, f_kind, f) = match name {
        "cluster" => (2, 2, 1, Bell, vec![0, 1], Computational, vec![p(0b00), p(0b11)]),
        "cluster-swapped" => (2, 2, 2, Bell, vec![0, 1, 2, 3], Bell, vec![p(1), p(0), p(2), p(3)]),
        "cat4" => (2, 2, 1, Bell, vec![0, 1], Bell, vec![p(0), p(1)]),
        "ghz" => (2, 1, 1, Bell, vec![0, 1], Hadamard, vec![p(0), p(1)]),
        "ghz-like" => (2, 1, 1, Bell, vec![0, 1], Computational, vec![p(0), p(1)]),
        // G_ijk = (|0jk⟩ + (-1)^i |1 j̄ k̄⟩)/√2 is cat3 element 2·(2j+k) + i:
        // G010, G111, G001, G100 paired with |00⟩, -|01⟩, |10⟩, -|11⟩
        "brown-swapped" => (
            3,
            2,
            2,
            Cat,
            vec![4, 7, 2, 1],
            Computational,
            vec![p(0b00), n(0b01), p(0b10), n(0b11)],
        ),
        // the table's Φ₁±/Ψ₁± pairing rewritten over the Bell basis:
        // χ = ½(|ψ⁺⟩|00⟩ − |ψ⁻⟩|11⟩ + |φ⁺⟩|10⟩ − |φ⁻⟩|01⟩)
        "chi" => (
            2,
            2,
            2,
            Bell,
            vec![0, 1, 2, 3],
            Computational,
            vec![p(0b00), n(0b11), p(0b10), n(0b01)],
        ),
        "omega" => (2, 2, 2, Bell, vec![0, 1, 2, 3], Bell, vec![p(1), p(0), p(2), n(3)]),
        other => return Err(Error::UnknownState(other.to_string())),
    };
    let spec = GenericFormSpec {
        m,
        l,
        n: bits,
        e_selection: e,
        f_selection: f,
    };
    let family = StateFamily::new(name, spec, e_kind, f_kind)?;
    let vector = family.state()?;
    Ok(NamedState { family, vector })
}

/// Why a state failed the generic-form test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FormRejection {
    WrongSize { expected: usize, found: usize },
    DimensionConditions { m: usize, l: usize, n: usize },
    SchmidtRank { expected: usize, found: usize },
    UnequalCoefficients { min: f64, max: f64, expected: f64 },
    /// The Schmidt support of the `m` side is not spanned by cat states.
    NonCatSupport { cat_states_in_support: usize },
}

impl std::fmt::Display for FormRejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormRejection::WrongSize { expected, found } => {
                write!(f, "state has {found} qubits, expected m + l = {expected}")
            }
            FormRejection::DimensionConditions { m, l, n } => {
                write!(f, "(m, l, n) = ({m}, {l}, {n}) violates m ≥ n, l ≥ n ≥ 1, m ≥ 2")
            }
            FormRejection::SchmidtRank { expected, found } => {
                write!(f, "Schmidt rank {found}, expected {expected}")
            }
            FormRejection::UnequalCoefficients { min, max, expected } => write!(
                f,
                "Schmidt coefficients range over [{min:.6}, {max:.6}], expected all {expected:.6}"
            ),
            FormRejection::NonCatSupport {
                cat_states_in_support,
            } => write!(
                f,
                "only {cat_states_in_support} cat states lie in the Schmidt support"
            ),
        }
    }
}

/// Recovered pairing `ψ = (1/√2ⁿ) Σ |eᵢ⟩|fᵢ⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericDecomposition {
    pub schmidt_coefficients: Vec<f64>,
    pub e_labels: Vec<String>,
    pub e_vectors: Vec<StateVector>,
    pub f_vectors: Vec<StateVector>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FormVerdict {
    Accepted(GenericDecomposition),
    Rejected {
        rejection: FormRejection,
        schmidt_coefficients: Vec<f64>,
    },
}

impl FormVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, FormVerdict::Accepted(_))
    }
}

/// Schmidt coefficients of `s` across the cut after the first `left` qubits, descending.
pub fn schmidt_coefficients(s: &StateVector, left: usize) -> Result<Vec<f64>> {
    let n = s.num_qubits();
    if left == 0 || left >= n {
        return Err(Error::Contract(format!(
            "cut after {left} qubits of a {n}-qubit state"
        )));
    }
    let rows = 1usize << left;
    let cols = 1usize << (n - left);
    let matrix = DMatrix::from_fn(rows, cols, |r, c| s.amplitude(r * cols + c));
    let mut values: Vec<f64> = matrix.singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Number of Schmidt coefficients above [`SCHMIDT_TOLERANCE`].
pub fn schmidt_rank(s: &StateVector, left: usize) -> Result<usize> {
    Ok(schmidt_coefficients(s, left)?
        .into_iter()
        .filter(|&c| c > SCHMIDT_TOLERANCE)
        .count())
}

/// Decides whether `s` has the generic form for `(m, l, n)` and recovers the pairing.
///
/// Equal Schmidt coefficients make the decomposition unique only up to a unitary
/// on the support, so instead of trusting the SVD's vectors this checks that the
/// support of the `m` side is spanned by cat-basis elements and reads each `fᵢ`
/// off as `√2ⁿ (⟨eᵢ| ⊗ I)|ψ⟩`.
pub fn verify_generic_form(s: &StateVector, m: usize, l: usize, n: usize) -> FormVerdict {
    let reject = |rejection, schmidt_coefficients| FormVerdict::Rejected {
        rejection,
        schmidt_coefficients,
    };
    if s.num_qubits() != m + l {
        return reject(
            FormRejection::WrongSize {
                expected: m + l,
                found: s.num_qubits(),
            },
            vec![],
        );
    }
    if n < 1 || m < n || l < n || m < 2 {
        return reject(FormRejection::DimensionConditions { m, l, n }, vec![]);
    }
    let coefficients = match schmidt_coefficients(s, m) {
        Ok(c) => c,
        Err(_) => return reject(FormRejection::DimensionConditions { m, l, n }, vec![]),
    };
    let count = 1usize << n;
    let nonzero: Vec<f64> = coefficients
        .iter()
        .copied()
        .filter(|&c| c > SCHMIDT_TOLERANCE)
        .collect();
    if nonzero.len() != count {
        return reject(
            FormRejection::SchmidtRank {
                expected: count,
                found: nonzero.len(),
            },
            coefficients,
        );
    }
    let expected = (count as f64).sqrt().recip();
    let max = nonzero[0];
    let min = nonzero[count - 1];
    if (max - expected).abs() > SCHMIDT_TOLERANCE || (min - expected).abs() > SCHMIDT_TOLERANCE {
        return reject(
            FormRejection::UnequalCoefficients { min, max, expected },
            coefficients,
        );
    }

    let cat = OrthonormalBasis::cat_or_bell(m).expect("m ≥ 2");
    let left: Vec<usize> = (0..m).collect();
    let mut e_labels = Vec::new();
    let mut e_vectors = Vec::new();
    let mut f_vectors = Vec::new();
    for (k, element) in cat.elements().iter().enumerate() {
        // ⟨c|ρ_A|c⟩ = |P_S c|² / 2ⁿ on a flat spectrum
        let Ok(Some((p, remainder))) = project_onto(s, &left, element) else {
            continue;
        };
        if (p * count as f64 - 1.0).abs() <= SCHMIDT_TOLERANCE {
            e_labels.push(cat.label(k).to_string());
            e_vectors.push(element.clone());
            f_vectors.push(remainder.expect("l ≥ 1 qubits remain"));
        }
    }
    if e_vectors.len() != count {
        return reject(
            FormRejection::NonCatSupport {
                cat_states_in_support: e_vectors.len(),
            },
            coefficients,
        );
    }
    FormVerdict::Accepted(GenericDecomposition {
        schmidt_coefficients: coefficients,
        e_labels,
        e_vectors,
        f_vectors,
    })
}
