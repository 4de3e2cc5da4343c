use crate::adversary::{apply_attack, AttackStrategy, EveRecord};
use crate::error::{Error, Result};
use crate::qcore::{FactoredRegister, MeasurementRecord, OrthonormalBasis, PermutationMap, QubitId};
use crate::rng::RandomStream;
use crate::states::StateFamily;

use super::decode::{build_decode_table, swap_bases, swap_sets, DecodeTable};
use super::transcript::{Event, Transcript};
use super::ProtocolConfig;

/// Sub-stream indices, so each party's randomness is independent of the others'.
const PERMUTATION_STREAM: u64 = 1;
const EVE_STREAM: u64 = 2;
const CHECK_STREAM: u64 = 3;
const SWAP_STREAM: u64 = 4;
const DECODE_STREAM: u64 = 5;

/// Alice's retained half of every carrier copy and the sequence `P_B` bound for Bob.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// The first `m` qubits of each copy.
    pub alice: Vec<Vec<QubitId>>,
    /// The last `l` qubits of each copy, copy by copy.
    pub carriers: Vec<QubitId>,
}

/// Builds `N` copies of the carrier state in `register`.
pub fn alice_prepare(family: &StateFamily, copies: usize, register: &mut FactoredRegister) -> Result<Prepared> {
    let state = family.state()?;
    let m = family.spec.m;
    let mut alice = Vec::with_capacity(copies);
    let mut carriers = Vec::with_capacity(copies * family.spec.l);
    for _ in 0..copies {
        let ids = register.add(state.clone());
        alice.push(ids[..m].to_vec());
        carriers.extend_from_slice(&ids[m..]);
    }
    Ok(Prepared { alice, carriers })
}

/// The permuted sequence `P_B''` and what Alice later discloses about it.
#[derive(Clone, Debug)]
pub struct PermutedSequence {
    pub sequence: Vec<QubitId>,
    pub permutation: PermutationMap,
    /// Post-permutation positions of each decoy pair.
    pub decoy_pairs: Vec<(usize, usize)>,
}

/// Appends `decoy_pairs` fresh `|ψ⁺⟩` pairs after the carriers and permutes the whole
/// sequence uniformly at random.
pub fn insert_decoys_and_permute(
    register: &mut FactoredRegister,
    carriers: &[QubitId],
    decoy_pairs: usize,
    rng: &mut RandomStream,
) -> Result<PermutedSequence> {
    let psi_plus = OrthonormalBasis::bell().element(0).clone();
    let mut unpermuted = carriers.to_vec();
    for _ in 0..decoy_pairs {
        unpermuted.extend(register.add(psi_plus.clone()));
    }
    let permutation = PermutationMap::random(unpermuted.len(), rng);
    let sequence = permutation.apply(&unpermuted)?;
    let base = carriers.len();
    let map = permutation.mapping();
    let decoy_pairs = (0..decoy_pairs)
        .map(|k| (map[base + 2 * k], map[base + 2 * k + 1]))
        .collect();
    Ok(PermutedSequence {
        sequence,
        permutation,
        decoy_pairs,
    })
}

/// Undoes the disclosed permutation, restoring `P_B'` order.
pub fn bob_reorder(received: &[QubitId], permutation: &PermutationMap) -> Result<Vec<QubitId>> {
    permutation.inverse().apply(received)
}

/// Outcome of Bob's Bell-basis test of the decoy pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoyCheck {
    pub pairs: usize,
    pub failures: usize,
    pub error_rate: f64,
    pub passed: bool,
    pub records: Vec<MeasurementRecord>,
}

impl DecoyCheck {
    pub fn event(&self) -> Event {
        Event::DecoyCheckResult {
            pairs: self.pairs,
            failures: self.failures,
            error_rate: self.error_rate,
            passed: self.passed,
        }
    }
}

/// Bell-measures every disclosed decoy pair of the received sequence and counts
/// outcomes other than `ψ⁺`.
pub fn bob_check_decoys(
    register: &mut FactoredRegister,
    received: &[QubitId],
    decoy_pairs: &[(usize, usize)],
    threshold: f64,
    rng: &mut RandomStream,
) -> Result<DecoyCheck> {
    let bell = OrthonormalBasis::bell();
    let mut records = Vec::with_capacity(decoy_pairs.len());
    for &(a, b) in decoy_pairs {
        let (&qa, &qb) = received
            .get(a)
            .zip(received.get(b))
            .ok_or_else(|| Error::Contract(format!("decoy position ({a}, {b}) out of range")))?;
        records.push(register.measure(&[qa, qb], &bell, rng)?);
    }
    let failures = records.iter().filter(|r| r.outcome_index != 0).count();
    let error_rate = if records.is_empty() {
        0.0
    } else {
        failures as f64 / records.len() as f64
    };
    Ok(DecoyCheck {
        pairs: records.len(),
        failures,
        error_rate,
        passed: error_rate <= threshold,
        records,
    })
}

/// Prepares `|e_j⟩` next to one copy and returns the ids of `|e_j⟩|e_i⟩|f⟩` in that order.
pub fn alice_encode(
    family: &StateFamily,
    register: &mut FactoredRegister,
    alice: &[QubitId],
    bob: &[QubitId],
    j: usize,
) -> Result<Vec<QubitId>> {
    let encoding = family.encoding_state(j)?.clone();
    let mut ids = register.add(encoding);
    ids.extend_from_slice(alice);
    ids.extend_from_slice(bob);
    Ok(ids)
}

/// Alice's two cat-basis measurements on the `2m` qubits she holds for one copy.
pub fn alice_swap_measure(
    register: &mut FactoredRegister,
    combined: &[QubitId],
    m: usize,
    rng: &mut RandomStream,
) -> Result<(MeasurementRecord, MeasurementRecord)> {
    if combined.len() < 2 * m {
        return Err(Error::Contract("combined register is shorter than 2m".into()));
    }
    let (first, second) = swap_sets(m);
    let (first_basis, second_basis) = swap_bases(m)?;
    let pick = |set: &[usize]| set.iter().map(|&k| combined[k]).collect::<Vec<_>>();
    let a1 = register.measure(&pick(&first), &first_basis, rng)?;
    let a2 = register.measure(&pick(&second), &second_basis, rng)?;
    Ok((a1, a2))
}

/// Bob measures his copy in the `{|f_i⟩}` basis and looks up the announced triple.
///
/// Returns his outcome label alongside the lookup result.
pub fn bob_decode(
    register: &mut FactoredRegister,
    bob: &[QubitId],
    f_basis: &OrthonormalBasis,
    announcement: (&str, &str),
    table: &DecodeTable,
    rng: &mut RandomStream,
) -> Result<(String, Result<u32>)> {
    let record = register.measure(bob, f_basis, rng)?;
    let decoded = table.decode(announcement.0, announcement.1, &record.outcome_label);
    Ok((record.outcome_label, decoded))
}

/// Splits a bit string into `copies` blocks of `n` bits, zero-padding the tail.
pub fn message_blocks(message: &str, n: usize, copies: usize) -> Result<Vec<usize>> {
    if let Some(c) = message.chars().find(|c| *c != '0' && *c != '1') {
        return Err(Error::Contract(format!("message contains non-bit character `{c}`")));
    }
    if message.len() > n * copies {
        return Err(Error::Contract(format!(
            "{}-bit message exceeds capacity N·n = {}",
            message.len(),
            n * copies
        )));
    }
    let mut padded = message.to_string();
    padded.extend(std::iter::repeat_n('0', n * copies - message.len()));
    Ok((0..copies)
        .map(|c| usize::from_str_radix(&padded[c * n..(c + 1) * n], 2).expect("bit string"))
        .collect())
}

/// Everything a session produced, including what Eve saw.
#[derive(Clone, Debug)]
pub struct SessionReport {
    pub transcript: Transcript,
    pub eve: EveRecord,
    pub decoy_check: DecoyCheck,
}

/// State of a session after the decoy check.
pub(crate) struct Transmission {
    pub register: FactoredRegister,
    pub alice: Vec<Vec<QubitId>>,
    pub bob_carriers: Vec<QubitId>,
    pub eve: EveRecord,
    pub check: DecoyCheck,
    pub disclosure: Event,
    pub transferred: usize,
}

/// Prepare, hide among decoys, pass through Eve, check, and reorder.
pub(crate) fn transmit(
    cfg: &ProtocolConfig,
    attack: &AttackStrategy,
    rng: &RandomStream,
) -> Result<Transmission> {
    cfg.validate()?;
    let mut register = FactoredRegister::new();
    let prepared = alice_prepare(&cfg.family, cfg.copies, &mut register)?;
    let permuted = insert_decoys_and_permute(
        &mut register,
        &prepared.carriers,
        cfg.decoy_pair_count(),
        &mut rng.split(PERMUTATION_STREAM),
    )?;
    let (received, eve) = apply_attack(
        &mut register,
        &permuted.sequence,
        attack,
        cfg,
        &mut rng.split(EVE_STREAM),
    )?;
    let check = bob_check_decoys(
        &mut register,
        &received,
        &permuted.decoy_pairs,
        cfg.error_threshold,
        &mut rng.split(CHECK_STREAM),
    )?;
    let restored = bob_reorder(&received, &permuted.permutation)?;
    let bob_carriers = restored[..prepared.carriers.len()].to_vec();
    Ok(Transmission {
        register,
        alice: prepared.alice,
        bob_carriers,
        eve,
        check,
        disclosure: Event::PermutationDisclosure {
            permutation: permuted.permutation,
            decoy_pairs: permuted.decoy_pairs,
        },
        transferred: permuted.sequence.len(),
    })
}

/// Runs a full session and keeps Eve's records and Bob's check details.
pub fn run_session(
    cfg: &ProtocolConfig,
    message: &str,
    attack: &AttackStrategy,
) -> Result<SessionReport> {
    let family = &cfg.family;
    let blocks = message_blocks(message, family.spec.n, cfg.copies)?;
    let table = build_decode_table(family)?;
    let rng = RandomStream::new(cfg.seed);
    let Transmission {
        mut register,
        alice,
        bob_carriers,
        eve,
        check,
        disclosure,
        transferred,
    } = transmit(cfg, attack, &rng)?;

    let mut transcript = Transcript::new(message);
    transcript.push(Event::QubitTransfer { qubits: transferred });
    transcript.push(Event::Ack);
    transcript.push(disclosure);
    transcript.push(check.event());
    if !check.passed {
        return Ok(SessionReport {
            transcript,
            eve,
            decoy_check: check,
        });
    }

    let (m, l, n) = (family.spec.m, family.spec.l, family.spec.n);
    let mut swap_rng = rng.split(SWAP_STREAM);
    let mut decode_rng = rng.split(DECODE_STREAM);
    for (copy, &j) in blocks.iter().enumerate() {
        let bob = &bob_carriers[copy * l..(copy + 1) * l];
        let combined = alice_encode(family, &mut register, &alice[copy], bob, j)?;
        transcript.push(Event::EncodedBlockIndex { copy });
        let (a1, a2) = alice_swap_measure(&mut register, &combined, m, &mut swap_rng)?;
        transcript.push(Event::SwapAnnouncement {
            copy,
            first: a1.outcome_label.clone(),
            second: a2.outcome_label.clone(),
        });
        let (_, decoded) = bob_decode(
            &mut register,
            bob,
            family.f_basis(),
            (&a1.outcome_label, &a2.outcome_label),
            &table,
            &mut decode_rng,
        )?;
        match decoded {
            Ok(value) => transcript.push(Event::DecodeResult {
                copy,
                bits: crate::qcore::format_bits(value as usize, n),
            }),
            Err(Error::Corruption { first, second, bob }) => {
                transcript.push(Event::DecodeFailure {
                    copy,
                    first,
                    second,
                    bob,
                })
            }
            Err(other) => return Err(other),
        }
    }
    Ok(SessionReport {
        transcript,
        eve,
        decoy_check: check,
    })
}

/// Runs Steps 1 to 7 for `message` and returns the transcript.
///
/// A failed decoy check is recorded as an abort rather than an error.
pub fn run_protocol(cfg: &ProtocolConfig, message: &str, attack: &AttackStrategy) -> Result<Transcript> {
    Ok(run_session(cfg, message, attack)?.transcript)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::named_state;

    fn ghz_like(copies: usize) -> ProtocolConfig {
        ProtocolConfig::new(named_state("ghz-like").unwrap().family, copies)
    }

    #[test]
    fn prepare_splits_alice_and_bob() {
        let family = named_state("brown-swapped").unwrap().family;
        let mut reg = FactoredRegister::new();
        let p = alice_prepare(&family, 1, &mut reg).unwrap();
        assert_eq!(p.alice, vec![vec![QubitId(0), QubitId(1), QubitId(2)]]);
        assert_eq!(p.carriers, vec![QubitId(3), QubitId(4)]);
    }

    #[test]
    fn decoy_coordinates_point_at_partners() {
        let mut reg = FactoredRegister::new();
        let carriers = vec![QubitId(100), QubitId(101)];
        let mut rng = RandomStream::new(9);
        let p = insert_decoys_and_permute(&mut reg, &carriers, 1, &mut rng).unwrap();
        assert_eq!(p.sequence.len(), 4);
        let (a, b) = p.decoy_pairs[0];
        assert_eq!((p.sequence[a], p.sequence[b]), (QubitId(0), QubitId(1)));
        let restored = bob_reorder(&p.sequence, &p.permutation).unwrap();
        assert_eq!(&restored[..2], &carriers[..]);
    }

    #[test]
    fn message_blocks_pad_with_zeros() {
        assert_eq!(message_blocks("101", 2, 2).unwrap(), vec![2, 2]);
        assert_eq!(message_blocks("", 1, 0).unwrap(), Vec::<usize>::new());
        assert!(message_blocks("0101", 1, 3).is_err());
        assert!(message_blocks("0a", 1, 2).is_err());
    }

    #[test]
    fn ghz_like_delivers_message() {
        let t = run_protocol(&ghz_like(2).with_seed(7), "01", &AttackStrategy::None).unwrap();
        assert_eq!(t.recovered_message().as_deref(), Some("01"));
        assert_eq!(t.decoy_check(), Some((0.0, true)));
    }

    #[test]
    fn zero_copies_is_a_passing_empty_run() {
        let t = run_protocol(&ghz_like(0), "", &AttackStrategy::None).unwrap();
        assert!(!t.aborted());
        assert_eq!(t.recovered_bits(), "");
        assert!(t.delivered());
    }

    #[test]
    fn announcement_precedes_decode_for_each_copy() {
        let family = named_state("omega").unwrap().family;
        let cfg = ProtocolConfig::new(family, 2).with_seed(1);
        let t = run_protocol(&cfg, "1011", &AttackStrategy::None).unwrap();
        let kinds: Vec<&str> = t
            .events
            .iter()
            .map(|e| match e {
                Event::QubitTransfer { .. } => "transfer",
                Event::Ack => "ack",
                Event::PermutationDisclosure { .. } => "disclose",
                Event::DecoyCheckResult { .. } => "check",
                Event::EncodedBlockIndex { .. } => "encode",
                Event::SwapAnnouncement { .. } => "announce",
                Event::DecodeResult { .. } => "decode",
                Event::DecodeFailure { .. } => "failure",
            })
            .collect();
        assert_eq!(
            kinds,
            ["transfer", "ack", "disclose", "check", "encode", "announce", "decode", "encode", "announce", "decode"]
        );
        assert!(t.delivered());
    }

    #[test]
    fn same_seed_same_transcript() {
        let cfg = ghz_like(3).with_seed(11);
        let a = run_protocol(&cfg, "101", &AttackStrategy::None).unwrap();
        let b = run_protocol(&cfg, "101", &AttackStrategy::None).unwrap();
        assert_eq!(a, b);
    }
}
