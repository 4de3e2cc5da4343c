//! Python bindings: catalog states, the generic-form verifier, decode tables,
//! sessions, detection estimators and the efficiency and leakage audits.

use dsqc_core::adversary::{self, AttackStrategy};
use dsqc_core::analysis::{self, Convention};
use dsqc_core::protocol::{self, ProtocolConfig, TranscriptDocument};
use dsqc_core::qcore::{format_bits, StateVector};
use dsqc_core::states::{self, FormVerdict, SpecDocument, StateFamily};
use dsqc_core::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Internal(_) | Error::Corruption { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A member of the carrier family `(1/√2ⁿ) Σ |eᵢ⟩|fᵢ⟩`.
#[pyclass(name = "State", module = "dsqc", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyState {
    family: StateFamily,
}

#[pymethods]
impl PyState {
    /// Builds a state from its JSON spec document.
    #[staticmethod]
    fn from_spec(json: &str) -> PyResult<Self> {
        let doc: SpecDocument =
            serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self {
            family: StateFamily::from_document(&doc).map_err(py_err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.family.name
    }

    #[getter]
    fn m(&self) -> usize {
        self.family.spec.m
    }

    #[getter]
    fn l(&self) -> usize {
        self.family.spec.l
    }

    #[getter]
    fn n(&self) -> usize {
        self.family.spec.n
    }

    /// Amplitudes over `m + l` qubits, qubit 0 most significant.
    fn amplitudes(&self) -> PyResult<Vec<Complex64>> {
        Ok(self.family.state().map_err(py_err)?.amplitudes().to_vec())
    }

    fn to_spec(&self) -> String {
        serde_json::to_string(&self.family.to_document()).expect("spec documents serialize")
    }

    fn __repr__(&self) -> String {
        let s = &self.family.spec;
        format!("State({:?}, m={}, l={}, n={})", self.family.name, s.m, s.l, s.n)
    }
}

#[pyfunction]
fn catalog() -> Vec<&'static str> {
    states::CATALOG.to_vec()
}

#[pyfunction]
fn named_state(name: &str) -> PyResult<PyState> {
    Ok(PyState {
        family: states::named_state(name).map_err(py_err)?.family,
    })
}

/// Returns `(accepted, schmidt_coefficients, reason)`; `reason` is `None` when accepted.
#[pyfunction]
fn verify(amplitudes: Vec<Complex64>, m: usize, l: usize, n: usize) -> PyResult<(bool, Vec<f64>, Option<String>)> {
    if !amplitudes.len().is_power_of_two() {
        return Err(PyValueError::new_err("amplitude count must be a power of two"));
    }
    let qubits = amplitudes.len().trailing_zeros() as usize;
    let s = StateVector::new(qubits, amplitudes).map_err(py_err)?;
    Ok(match states::verify_generic_form(&s, m, l, n) {
        FormVerdict::Accepted(d) => (true, d.schmidt_coefficients, None),
        FormVerdict::Rejected {
            rejection,
            schmidt_coefficients,
        } => (false, schmidt_coefficients, Some(rejection.to_string())),
    })
}

/// Rows `(first, second, bob, message_bits)` sorted by announcement.
#[pyfunction]
fn decode_table(state: &PyState) -> PyResult<Vec<(String, String, String, String)>> {
    let table = protocol::build_decode_table(&state.family).map_err(py_err)?;
    let n = state.family.spec.n;
    Ok(table
        .rows()
        .into_iter()
        .map(|r| (r.first, r.second, r.bob, format_bits(r.message as usize, n)))
        .collect())
}

fn config(state: &PyState, copies: usize, decoy_pairs: Option<usize>) -> PyResult<ProtocolConfig> {
    let mut cfg = ProtocolConfig::new(state.family.clone(), copies);
    if let Some(pairs) = decoy_pairs {
        cfg = cfg.with_decoy_pairs(pairs);
    }
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

fn strategy(attack: &str) -> PyResult<AttackStrategy> {
    attack.parse().map_err(py_err)
}

/// Runs one session and returns its transcript document as JSON.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (state, message, copies=None, attack="none", decoy_pairs=None, threshold=0.0, seed=0))]
fn run_protocol(
    py: Python<'_>,
    state: &PyState,
    message: &str,
    copies: Option<usize>,
    attack: &str,
    decoy_pairs: Option<usize>,
    threshold: f64,
    seed: u64,
) -> PyResult<String> {
    let copies = copies.unwrap_or(message.len().div_ceil(state.family.spec.n));
    let cfg = config(state, copies, decoy_pairs)?
        .with_threshold(threshold)
        .with_seed(seed);
    let attack = strategy(attack)?;
    let transcript = py
        .detach(|| protocol::run_protocol(&cfg, message, &attack))
        .map_err(py_err)?;
    Ok(TranscriptDocument::new(&cfg, &attack, transcript).to_json())
}

#[pyfunction]
#[pyo3(signature = (state, copies, attack, decoy_pairs=None))]
fn detection_exact(state: &PyState, copies: usize, attack: &str, decoy_pairs: Option<usize>) -> PyResult<f64> {
    let cfg = config(state, copies, decoy_pairs)?;
    adversary::detection_probability_exact(&cfg, &strategy(attack)?).map_err(py_err)
}

/// Returns `(estimate, standard_error)`.
#[pyfunction]
#[pyo3(signature = (state, copies, attack, trials, seed=0, decoy_pairs=None))]
fn detection_mc(
    py: Python<'_>,
    state: &PyState,
    copies: usize,
    attack: &str,
    trials: usize,
    seed: u64,
    decoy_pairs: Option<usize>,
) -> PyResult<(f64, f64)> {
    let cfg = config(state, copies, decoy_pairs)?;
    let attack = strategy(attack)?;
    let mc = py
        .detach(|| adversary::detection_probability_mc(&cfg, &attack, trials, seed))
        .map_err(py_err)?;
    Ok((mc.estimate, mc.standard_error))
}

#[pyfunction]
fn cross_paired_bell_exact() -> PyResult<f64> {
    adversary::cross_paired_bell_exact().map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (m, l, n, convention="total_qubits"))]
fn efficiency(m: usize, l: usize, n: usize, convention: &str) -> PyResult<f64> {
    let convention = match convention {
        "total_qubits" => Convention::TotalQubits,
        "transmitted_qubits" => Convention::TransmittedQubits,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown convention `{other}`; expected total_qubits or transmitted_qubits"
            )))
        }
    };
    Ok(analysis::efficiency(m, l, n, convention).map_err(py_err)?.eta)
}

/// Largest total-variation distance between announcement distributions of two messages.
#[pyfunction]
fn leakage_audit(state: &PyState) -> PyResult<f64> {
    analysis::leakage_audit(&state.family).map_err(py_err)
}

#[pymodule]
fn dsqc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(named_state, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(decode_table, m)?)?;
    m.add_function(wrap_pyfunction!(run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(detection_exact, m)?)?;
    m.add_function(wrap_pyfunction!(detection_mc, m)?)?;
    m.add_function(wrap_pyfunction!(cross_paired_bell_exact, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(leakage_audit, m)?)?;
    Ok(())
}
