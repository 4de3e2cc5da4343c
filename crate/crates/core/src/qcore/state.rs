use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{PermutationMap, MAX_QUBITS, TOLERANCE};
use crate::error::{Error, Result};

/// Normalized pure state of an ordered qubit register.
///
/// Register position 0 is the leftmost ket symbol and the most significant bit
/// of the amplitude index, so `|01⟩` lives at index 1 and `|10⟩` at index 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps an amplitude vector that must already be normalized.
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_size(num_qubits, amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Contract(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn from_unnormalized(num_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_size(num_qubits, amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < TOLERANCE {
            return Err(Error::Contract("cannot normalize the zero vector".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_real(num_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::from_unnormalized(
            num_qubits,
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        )
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_size(num_qubits, 1usize << num_qubits.min(63))?;
        if index >= 1 << num_qubits {
            return Err(Error::Contract(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Product state from a bit string such as `"0110"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let index = parse_bits(bits)?;
        Self::basis_state(bits.len(), index)
    }

    /// Normalized superposition `Σ c_k |state_k⟩` of equally sized states.
    pub fn superpose(terms: &[(Complex64, &StateVector)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Contract("empty superposition".into()))?;
        let n = first.1.num_qubits;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (c, s) in terms {
            if s.num_qubits != n {
                return Err(Error::Contract("superposed states differ in size".into()));
            }
            for (acc, a) in amplitudes.iter_mut().zip(&s.amplitudes) {
                *acc += c * a;
            }
        }
        Self::from_unnormalized(n, amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ other`; `self` occupies the lower register positions.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_QUBITS {
            return Err(Error::RegisterTooLarge(n));
        }
        let mut amplitudes = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(StateVector {
            num_qubits: n,
            amplitudes,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Contract(format!(
                "inner product of {}- and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Moves the qubit at position `i` to position `perm.mapping()[i]`.
    pub fn permute_qubits(&self, perm: &PermutationMap) -> Result<StateVector> {
        if perm.size() != self.num_qubits {
            return Err(Error::Contract(format!(
                "permutation of size {} applied to {} qubits",
                perm.size(),
                self.num_qubits
            )));
        }
        let n = self.num_qubits;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (index, amp) in self.amplitudes.iter().enumerate() {
            let mut target = 0usize;
            for (from, &to) in perm.mapping().iter().enumerate() {
                let bit = (index >> (n - 1 - from)) & 1;
                target |= bit << (n - 1 - to);
            }
            amplitudes[target] = *amp;
        }
        Ok(StateVector {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Reorders the register so that `order[k]` becomes position `k`.
    pub fn reorder(&self, order: &[usize]) -> Result<StateVector> {
        let perm = PermutationMap::from_order(order)?;
        self.permute_qubits(&perm)
    }

    /// Controlled-NOT between two register positions.
    pub fn cnot(&self, control: usize, target: usize) -> Result<StateVector> {
        let n = self.num_qubits;
        if control >= n || target >= n || control == target {
            return Err(Error::Contract(format!(
                "invalid CNOT qubits ({control}, {target}) on {n} qubits"
            )));
        }
        let cmask = 1 << (n - 1 - control);
        let tmask = 1 << (n - 1 - target);
        let mut amplitudes = self.amplitudes.clone();
        for (index, amp) in self.amplitudes.iter().enumerate() {
            if index & cmask != 0 {
                amplitudes[index ^ tmask] = *amp;
            }
        }
        Ok(StateVector {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Copy with the global phase fixed so the first nonzero amplitude is real-positive.
    pub fn canonical(&self) -> StateVector {
        let mut out = self.clone();
        if let Some(first) = self.amplitudes.iter().find(|a| a.norm() > TOLERANCE) {
            let phase = first.conj() / first.norm();
            for a in &mut out.amplitudes {
                *a *= phase;
            }
        }
        out
    }

    /// Amplitude-wise equality within `tol`, including global phase.
    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.num_qubits == other.num_qubits
            && self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Equality up to a global phase.
    pub fn equal_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.canonical().approx_eq(&other.canonical(), tol)
    }

    /// Nonzero computational-basis components as `(index, amplitude)`.
    pub fn support(&self, tol: f64) -> Vec<(usize, Complex64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(i, a)| (i, *a))
            .collect()
    }

    /// True for `(|u⟩ + e^{iθ}|u^c⟩)/√2`: two complementary components of equal weight.
    pub fn is_cat_state(&self, tol: f64) -> bool {
        let support = self.support(tol);
        if support.len() != 2 {
            return false;
        }
        let full = (1usize << self.num_qubits) - 1;
        support[0].0 ^ support[1].0 == full
            && (support[0].1.norm() - support[1].1.norm()).abs() <= tol
    }

    pub(crate) fn from_raw(num_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self {
            num_qubits,
            amplitudes,
        }
    }
}

impl std::fmt::Display for StateVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (index, amp) in self.support(1e-12) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(
                f,
                "({:.6}{:+.6}i)|{}⟩",
                amp.re,
                amp.im,
                format_bits(index, self.num_qubits)
            )?;
        }
        Ok(())
    }
}

/// Big-endian bit string of `index` on `width` qubits.
pub fn format_bits(index: usize, width: usize) -> String {
    (0..width)
        .map(|q| if (index >> (width - 1 - q)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn parse_bits(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() > MAX_QUBITS {
        return Err(Error::Contract(format!("bad bit string `{bits}`")));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::Contract(format!("bad bit string `{bits}`"))),
    })
}

fn check_size(num_qubits: usize, len: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::Contract("a register needs at least one qubit".into()));
    }
    if num_qubits > MAX_QUBITS {
        return Err(Error::RegisterTooLarge(num_qubits));
    }
    if len != 1 << num_qubits {
        return Err(Error::Contract(format!(
            "{len} amplitudes supplied for {num_qubits} qubits"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = StateVector::from_bits("0").unwrap();
        let out = zero.tensor(&zero).unwrap();
        assert!(out.approx_eq(&StateVector::from_bits("00").unwrap(), TOLERANCE));
    }

    #[test]
    fn tensor_places_left_factor_first() {
        let bell = StateVector::from_real(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let zero = StateVector::from_bits("0").unwrap();
        let out = bell.tensor(&zero).unwrap();
        let expected =
            StateVector::from_real(3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(out.approx_eq(&expected, TOLERANCE));
    }

    #[test]
    fn swap_moves_bits() {
        let s = StateVector::from_bits("01").unwrap();
        let swapped = s.permute_qubits(&PermutationMap::swap(2, 0, 1).unwrap()).unwrap();
        assert!(swapped.approx_eq(&StateVector::from_bits("10").unwrap(), TOLERANCE));
    }

    #[test]
    fn permute_rejects_size_mismatch() {
        let s = StateVector::from_bits("01").unwrap();
        let perm = PermutationMap::identity(3);
        assert!(matches!(s.permute_qubits(&perm), Err(Error::Contract(_))));
    }

    #[test]
    fn inner_products() {
        let zero = StateVector::from_bits("0").unwrap();
        let one = StateVector::from_bits("1").unwrap();
        assert!((zero.inner_product(&zero).unwrap() - c(1.0)).norm() < TOLERANCE);
        assert!(zero.inner_product(&one).unwrap().norm() < TOLERANCE);
        assert!(zero.inner_product(&StateVector::from_bits("00").unwrap()).is_err());
    }

    #[test]
    fn canonical_phase_ignores_global_phase() {
        let a = StateVector::from_real(1, &[1.0, -1.0]).unwrap();
        let phase = Complex64::from_polar(1.0, 0.7);
        let b = StateVector::new(1, a.amplitudes().iter().map(|x| x * phase).collect()).unwrap();
        assert!(!a.approx_eq(&b, 1e-6));
        assert!(a.equal_up_to_phase(&b, TOLERANCE));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(StateVector::new(1, vec![c(1.0)]).is_err());
        assert!(StateVector::new(1, vec![c(1.0), c(1.0)]).is_err());
        assert!(StateVector::from_unnormalized(1, vec![c(0.0), c(0.0)]).is_err());
        assert!(matches!(
            StateVector::basis_state(17, 0),
            Err(Error::RegisterTooLarge(17))
        ));
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let s = StateVector::from_bits("10").unwrap().cnot(0, 1).unwrap();
        assert!(s.approx_eq(&StateVector::from_bits("11").unwrap(), TOLERANCE));
        let s = StateVector::from_bits("01").unwrap().cnot(0, 1).unwrap();
        assert!(s.approx_eq(&StateVector::from_bits("01").unwrap(), TOLERANCE));
    }

    #[test]
    fn cat_detection() {
        let ghz = StateVector::from_real(3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(ghz.is_cat_state(1e-12));
        let not_cat = StateVector::from_real(2, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(!not_cat.is_cat_state(1e-12));
    }

    #[test]
    fn bit_formatting_round_trips() {
        assert_eq!(format_bits(5, 4), "0101");
        assert_eq!(parse_bits("0101").unwrap(), 5);
        assert!(parse_bits("01a").is_err());
    }
}
