use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::ProtocolConfig;
use crate::qcore::{FactoredRegister, MeasurementRecord, OrthonormalBasis, QubitId, StateVector};
use crate::rng::RandomStream;
use crate::states::StateFamily;

/// Which measurement Eve makes in a measure-and-resend attack.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResendBasis {
    /// Every in-flight qubit in `{|0⟩, |1⟩}`.
    Computational,
    /// Bell measurements on consecutive positions `(2i, 2i+1)`; a trailing odd qubit is left alone.
    BellRandomPairing,
}

/// Eve's behavior on the quantum channel.
#[derive(Clone, Debug, PartialEq)]
pub enum AttackStrategy {
    None,
    MeasureResend(ResendBasis),
    /// CNOT from every in-flight qubit onto a fresh `|0⟩` ancilla Eve keeps.
    CnotClone,
    /// Eve keeps the real sequence and forwards an unpermuted fake of the same length.
    /// `None` means a fake built from the session's own state family.
    CaptureReplace { fake: Option<Box<StateFamily>> },
}

impl AttackStrategy {
    /// Every strategy reachable by name.
    pub const NAMES: [&'static str; 5] = [
        "none",
        "measure-resend",
        "measure-resend-bell",
        "cnot-clone",
        "capture-replace",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AttackStrategy::None => "none",
            AttackStrategy::MeasureResend(ResendBasis::Computational) => "measure-resend",
            AttackStrategy::MeasureResend(ResendBasis::BellRandomPairing) => "measure-resend-bell",
            AttackStrategy::CnotClone => "cnot-clone",
            AttackStrategy::CaptureReplace { .. } => "capture-replace",
        }
    }

    pub fn all() -> Vec<AttackStrategy> {
        Self::NAMES
            .iter()
            .map(|n| n.parse().expect("listed names parse"))
            .collect()
    }
}

impl std::str::FromStr for AttackStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => AttackStrategy::None,
            "measure-resend" | "measure-resend-computational" => {
                AttackStrategy::MeasureResend(ResendBasis::Computational)
            }
            "measure-resend-bell" => AttackStrategy::MeasureResend(ResendBasis::BellRandomPairing),
            "cnot-clone" => AttackStrategy::CnotClone,
            "capture-replace" => AttackStrategy::CaptureReplace { fake: None },
            other => {
                return Err(Error::Contract(format!(
                    "unknown attack `{other}`; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

impl std::fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What Eve kept: her measurement results, her CNOT targets, and captured qubits.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EveRecord {
    pub measurements: Vec<MeasurementRecord>,
    pub ancillas: Vec<QubitId>,
    pub captured: Vec<QubitId>,
}

/// Unpermuted fake sequence: `copies` carrier halves of `family` followed by `decoy_pairs` `|ψ⁺⟩` pairs.
pub(crate) fn fake_sequence(
    register: &mut FactoredRegister,
    family: &StateFamily,
    copies: usize,
    decoy_pairs: usize,
) -> Result<Vec<QubitId>> {
    let state = family.state()?;
    let m = family.spec.m;
    let mut sequence = Vec::new();
    for _ in 0..copies {
        sequence.extend_from_slice(&register.add(state.clone())[m..]);
    }
    let psi_plus = OrthonormalBasis::bell().element(0).clone();
    for _ in 0..decoy_pairs {
        sequence.extend(register.add(psi_plus.clone()));
    }
    Ok(sequence)
}

/// Applies `strategy` to the in-flight sequence and returns what Bob receives.
pub fn apply_attack(
    register: &mut FactoredRegister,
    in_flight: &[QubitId],
    strategy: &AttackStrategy,
    cfg: &ProtocolConfig,
    rng: &mut RandomStream,
) -> Result<(Vec<QubitId>, EveRecord)> {
    let mut eve = EveRecord::default();
    match strategy {
        AttackStrategy::None => {}
        AttackStrategy::MeasureResend(ResendBasis::Computational) => {
            let z = OrthonormalBasis::computational(1)?;
            for &q in in_flight {
                eve.measurements.push(register.measure(&[q], &z, rng)?);
            }
        }
        AttackStrategy::MeasureResend(ResendBasis::BellRandomPairing) => {
            let bell = OrthonormalBasis::bell();
            for pair in in_flight.chunks_exact(2) {
                eve.measurements.push(register.measure(pair, &bell, rng)?);
            }
        }
        AttackStrategy::CnotClone => {
            let zero = StateVector::from_bits("0")?;
            for &q in in_flight {
                let ancilla = register.add(zero.clone())[0];
                register.cnot(q, ancilla)?;
                eve.ancillas.push(ancilla);
            }
        }
        AttackStrategy::CaptureReplace { fake } => {
            let family = fake.as_deref().unwrap_or(&cfg.family);
            let sequence = fake_sequence(register, family, cfg.copies, cfg.decoy_pair_count())?;
            if sequence.len() != in_flight.len() {
                return Err(Error::Contract(format!(
                    "fake sequence has {} qubits but {} are in flight",
                    sequence.len(),
                    in_flight.len()
                )));
            }
            eve.captured = in_flight.to_vec();
            return Ok((sequence, eve));
        }
    }
    Ok((in_flight.to_vec(), eve))
}
