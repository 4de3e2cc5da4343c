use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{format_bits, StateVector, MAX_QUBITS};
use crate::error::{Error, Result};

/// Indexed orthonormal basis of a `num_qubits`-qubit space, with a label per element.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    name: String,
    num_qubits: usize,
    elements: Vec<StateVector>,
    labels: Vec<String>,
}

/// Families of bases that state descriptions can refer to by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Computational,
    /// Products of `|+⟩`/`|−⟩`.
    Hadamard,
    /// The two-qubit cat basis with `psi±`/`phi±` labels.
    Bell,
    Cat,
}

impl BasisKind {
    pub fn build(self, num_qubits: usize) -> Result<OrthonormalBasis> {
        match self {
            BasisKind::Computational => OrthonormalBasis::computational(num_qubits),
            BasisKind::Hadamard => OrthonormalBasis::hadamard(num_qubits),
            BasisKind::Bell if num_qubits == 2 => Ok(OrthonormalBasis::bell()),
            BasisKind::Bell => Err(Error::Contract(format!(
                "the Bell basis spans 2 qubits, not {num_qubits}"
            ))),
            BasisKind::Cat => OrthonormalBasis::cat(num_qubits),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Computational => "computational",
            BasisKind::Hadamard => "hadamard",
            BasisKind::Bell => "bell",
            BasisKind::Cat => "cat",
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "computational" | "z" => Ok(BasisKind::Computational),
            "hadamard" | "x" => Ok(BasisKind::Hadamard),
            "bell" => Ok(BasisKind::Bell),
            "cat" => Ok(BasisKind::Cat),
            other => Err(Error::Spec(format!("unknown basis kind `{other}`"))),
        }
    }
}

impl OrthonormalBasis {
    /// Builds a basis after checking completeness and orthonormality.
    pub fn new(
        name: impl Into<String>,
        elements: Vec<StateVector>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::Contract("empty basis".into()))?;
        let num_qubits = first.num_qubits();
        if elements.len() != 1 << num_qubits || labels.len() != elements.len() {
            return Err(Error::Contract(format!(
                "a {num_qubits}-qubit basis needs {} elements and labels",
                1 << num_qubits
            )));
        }
        let basis = Self {
            name: name.into(),
            num_qubits,
            elements,
            labels,
        };
        let deviation = basis.gram_deviation()?;
        if deviation > 1e-10 {
            return Err(Error::Contract(format!(
                "basis `{}` is not orthonormal (Gram deviation {deviation:e})",
                basis.name
            )));
        }
        Ok(basis)
    }

    pub fn computational(num_qubits: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let elements = (0..1 << num_qubits)
            .map(|i| StateVector::basis_state(num_qubits, i))
            .collect::<Result<Vec<_>>>()?;
        let labels = (0..1 << num_qubits)
            .map(|i| format_bits(i, num_qubits))
            .collect();
        Ok(Self {
            name: format!("z{num_qubits}"),
            num_qubits,
            elements,
            labels,
        })
    }

    /// Product basis of `|+⟩ = (|0⟩+|1⟩)/√2` and `|−⟩ = (|0⟩−|1⟩)/√2`; bit 1 selects `|−⟩`.
    pub fn hadamard(num_qubits: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        let norm = (dim as f64).sqrt().recip();
        let mut elements = Vec::with_capacity(dim);
        let mut labels = Vec::with_capacity(dim);
        for k in 0..dim {
            let amps = (0..dim)
                .map(|x| {
                    let sign = if (k & x).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::new(sign * norm, 0.0)
                })
                .collect();
            elements.push(StateVector::from_raw(num_qubits, amps));
            labels.push(
                format_bits(k, num_qubits)
                    .chars()
                    .map(|c| if c == '0' { '+' } else { '-' })
                    .collect(),
            );
        }
        Ok(Self {
            name: format!("x{num_qubits}"),
            num_qubits,
            elements,
            labels,
        })
    }

    /// `psi± = (|00⟩ ± |11⟩)/√2`, `phi± = (|01⟩ ± |10⟩)/√2`, in that order.
    ///
    /// Element order coincides with `cat(2)`, only the labels differ.
    pub fn bell() -> Self {
        let cat = Self::cat(2).expect("two-qubit cat basis");
        Self {
            name: "bell".into(),
            num_qubits: 2,
            elements: cat.elements,
            labels: ["psi+", "psi-", "phi+", "phi-"].map(String::from).to_vec(),
        }
    }

    /// Cat basis `(|u⟩ ± |u^c⟩)/√2` over representatives `u` with leading bit 0.
    ///
    /// Element `2·int(u) + s` carries sign `+` for `s = 0` and `−` for `s = 1`.
    pub fn cat(num_qubits: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        let full = dim - 1;
        let mut elements = Vec::with_capacity(dim);
        let mut labels = Vec::with_capacity(dim);
        for u in 0..dim / 2 {
            for (s, sign) in [(0, 1.0), (1, -1.0)] {
                let mut amps = vec![Complex64::new(0.0, 0.0); dim];
                amps[u] = Complex64::new(FRAC_1_SQRT_2, 0.0);
                amps[u ^ full] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
                elements.push(StateVector::from_raw(num_qubits, amps));
                labels.push(format!(
                    "cat{num_qubits}({},{})",
                    if s == 0 { '+' } else { '-' },
                    format_bits(u, num_qubits)
                ));
            }
        }
        Ok(Self {
            name: format!("cat{num_qubits}"),
            num_qubits,
            elements,
            labels,
        })
    }

    /// Cat basis on `num_qubits`, using Bell labels for the two-qubit case.
    pub fn cat_or_bell(num_qubits: usize) -> Result<Self> {
        if num_qubits == 2 {
            Ok(Self::bell())
        } else {
            Self::cat(num_qubits)
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[StateVector] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> &StateVector {
        &self.elements[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Largest entry of `|G − I|` for the Gram matrix `G_ij = ⟨e_i|e_j⟩`.
    pub fn gram_deviation(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                let g = a.inner_product(b)?;
                worst = worst.max((g - Complex64::new(expected, 0.0)).norm());
            }
        }
        Ok(worst)
    }
}

fn check_width(num_qubits: usize) -> Result<()> {
    if num_qubits < 1 {
        return Err(Error::Contract("a basis needs at least one qubit".into()));
    }
    if num_qubits > MAX_QUBITS {
        return Err(Error::RegisterTooLarge(num_qubits));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::TOLERANCE;

    #[test]
    fn bell_psi_plus_amplitudes() {
        let bell = OrthonormalBasis::bell();
        let psi = bell.element(bell.index_of("psi+").unwrap());
        let h = FRAC_1_SQRT_2;
        let expected = StateVector::from_real(2, &[h, 0.0, 0.0, h]).unwrap();
        assert!(psi.approx_eq(&expected, TOLERANCE));
        let phi_minus = bell.element(bell.index_of("phi-").unwrap());
        assert!(psi.inner_product(phi_minus).unwrap().norm() < TOLERANCE);
    }

    #[test]
    fn single_qubit_cat_basis_is_plus_minus() {
        let cat = OrthonormalBasis::cat(1).unwrap();
        let h = OrthonormalBasis::hadamard(1).unwrap();
        assert!(cat.element(0).approx_eq(h.element(0), TOLERANCE));
        assert!(cat.element(1).approx_eq(h.element(1), TOLERANCE));
    }

    #[test]
    fn four_qubit_cat_leading_element() {
        let cat = OrthonormalBasis::cat(4).unwrap();
        let expected =
            StateVector::from_real(4, &{
                let mut a = [0.0; 16];
                a[0] = 1.0;
                a[15] = 1.0;
                a
            })
            .unwrap();
        assert!(cat.element(0).approx_eq(&expected, TOLERANCE));
        assert_eq!(cat.label(0), "cat4(+,0000)");
        assert_eq!(cat.label(3), "cat4(-,0001)");
    }

    #[test]
    fn cat_zero_qubits_is_contract_violation() {
        assert!(matches!(OrthonormalBasis::cat(0), Err(Error::Contract(_))));
    }

    #[test]
    fn hadamard_and_computational_are_orthonormal() {
        for k in 1..=4 {
            assert!(OrthonormalBasis::hadamard(k).unwrap().gram_deviation().unwrap() < TOLERANCE);
            assert!(
                OrthonormalBasis::computational(k)
                    .unwrap()
                    .gram_deviation()
                    .unwrap()
                    < TOLERANCE
            );
        }
    }

    #[test]
    fn new_rejects_non_orthogonal_families() {
        let zero = StateVector::from_bits("0").unwrap();
        let plus = StateVector::from_real(1, &[1.0, 1.0]).unwrap();
        let labels = vec!["0".to_string(), "+".to_string()];
        assert!(OrthonormalBasis::new("bad", vec![zero, plus], labels).is_err());
    }
}
