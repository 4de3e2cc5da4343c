use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::adversary::AttackStrategy;
use crate::qcore::PermutationMap;
use crate::states::SpecDocument;

use super::ProtocolConfig;

/// Version of the machine-readable transcript layout.
pub const SCHEMA_VERSION: u32 = 1;

/// One step of a protocol session, in the order it happened.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    /// Alice sends the permuted sequence.
    QubitTransfer { qubits: usize },
    /// Bob confirms receipt.
    Ack,
    /// Alice reveals the permutation and where the decoy partners ended up.
    PermutationDisclosure {
        permutation: PermutationMap,
        decoy_pairs: Vec<(usize, usize)>,
    },
    DecoyCheckResult {
        pairs: usize,
        failures: usize,
        error_rate: f64,
        passed: bool,
    },
    EncodedBlockIndex { copy: usize },
    SwapAnnouncement {
        copy: usize,
        first: String,
        second: String,
    },
    DecodeResult { copy: usize, bits: String },
    /// Bob saw an outcome triple no honest run can produce.
    DecodeFailure {
        copy: usize,
        first: String,
        second: String,
        bob: String,
    },
}

impl Event {
    fn log_line(&self) -> String {
        match self {
            Event::QubitTransfer { qubits } => format!("qubit_transfer qubits={qubits}"),
            Event::Ack => "ack".into(),
            Event::PermutationDisclosure {
                permutation,
                decoy_pairs,
            } => {
                let mapping = join(permutation.mapping().iter().map(|x| x.to_string()));
                let pairs = join(decoy_pairs.iter().map(|(a, b)| format!("{a}-{b}")));
                format!("permutation_disclosure mapping=[{mapping}] decoy_pairs=[{pairs}]")
            }
            Event::DecoyCheckResult {
                pairs,
                failures,
                error_rate,
                passed,
            } => format!(
                "decoy_check pairs={pairs} failures={failures} error_rate={error_rate} passed={passed}"
            ),
            Event::EncodedBlockIndex { copy } => format!("encoded_block copy={copy}"),
            Event::SwapAnnouncement {
                copy,
                first,
                second,
            } => format!("swap_announcement copy={copy} first={first} second={second}"),
            Event::DecodeResult { copy, bits } => format!("decode_result copy={copy} bits={bits}"),
            Event::DecodeFailure {
                copy,
                first,
                second,
                bob,
            } => format!("decode_failure copy={copy} first={first} second={second} bob={bob}"),
        }
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(",")
}

/// Ordered event record of a session plus the message it carried.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub message: String,
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            events: Vec::new(),
        }
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn decoy_check(&self) -> Option<(f64, bool)> {
        self.events.iter().find_map(|e| match e {
            Event::DecoyCheckResult {
                error_rate, passed, ..
            } => Some((*error_rate, *passed)),
            _ => None,
        })
    }

    /// True when Bob's decoy check failed and the session stopped there.
    pub fn aborted(&self) -> bool {
        matches!(self.decoy_check(), Some((_, false)))
    }

    /// Every decoded block concatenated, padding included.
    pub fn recovered_bits(&self) -> String {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::DecodeResult { bits, .. } => Some(bits.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Decoded bits trimmed to the sent message length, or `None` if any block failed
    /// or the session aborted.
    pub fn recovered_message(&self) -> Option<String> {
        if self.aborted() || self.decode_failures() > 0 {
            return None;
        }
        let bits = self.recovered_bits();
        bits.get(..self.message.len()).map(str::to_string)
    }

    pub fn decode_failures(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::DecodeFailure { .. }))
            .count()
    }

    pub fn delivered(&self) -> bool {
        self.recovered_message().as_deref() == Some(self.message.as_str())
    }

    /// One `name key=value…` line per event.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            let _ = writeln!(out, "{}", event.log_line());
        }
        out
    }
}

/// Session parameters as recorded alongside a transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub state: SpecDocument,
    pub copies: usize,
    pub decoy_pairs: usize,
    pub error_threshold: f64,
    pub seed: u64,
    pub attack: String,
}

/// Headline numbers of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub aborted: bool,
    pub decoy_error_rate: Option<f64>,
    pub recovered_message: Option<String>,
    pub delivered: bool,
    pub decode_failures: usize,
}

/// Self-describing record of one run: config, events and summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptDocument {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub transcript: Transcript,
    pub summary: Summary,
}

impl TranscriptDocument {
    pub fn new(cfg: &ProtocolConfig, attack: &AttackStrategy, transcript: Transcript) -> Self {
        let summary = Summary {
            aborted: transcript.aborted(),
            decoy_error_rate: transcript.decoy_check().map(|(rate, _)| rate),
            recovered_message: transcript.recovered_message(),
            delivered: transcript.delivered(),
            decode_failures: transcript.decode_failures(),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            config: ConfigEcho {
                state: cfg.family.to_document(),
                copies: cfg.copies,
                decoy_pairs: cfg.decoy_pair_count(),
                error_threshold: cfg.error_threshold,
                seed: cfg.seed,
                attack: attack.name().to_string(),
            },
            transcript,
            summary,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript documents always serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
