use rayon::prelude::*;
use serde::Serialize;

use super::strategy::{AttackStrategy, ResendBasis};
use crate::error::{Error, Result};
use crate::protocol::{transmit, ProtocolConfig};
use crate::qcore::{branches, embed, outcome_distribution, OrthonormalBasis, StateVector};
use crate::rng::RandomStream;
use crate::states::StateFamily;

/// Monte-Carlo estimate of a per-decoy-pair failure probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Binomial standard error `√(p(1−p)/pairs)`.
    pub standard_error: f64,
    pub failures: usize,
    pub pairs: usize,
    pub trials: usize,
}

impl McEstimate {
    fn from_counts(failures: usize, pairs: usize, trials: usize) -> Self {
        let estimate = if pairs == 0 { 0.0 } else { failures as f64 / pairs as f64 };
        let standard_error = if pairs == 0 {
            0.0
        } else {
            (estimate * (1.0 - estimate) / pairs as f64).sqrt()
        };
        Self {
            estimate,
            standard_error,
            failures,
            pairs,
            trials,
        }
    }

    /// Whether `value` lies within `k` standard errors. A zero-variance estimate
    /// must match exactly.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        let diff = (self.estimate - value).abs();
        if self.standard_error == 0.0 {
            diff < 1e-12
        } else {
            diff <= k * self.standard_error
        }
    }
}

/// Every projective outcome of `qubits` with the collapsed full-register state.
fn collapse(s: &StateVector, qubits: &[usize], basis: &OrthonormalBasis) -> Result<Vec<(f64, StateVector)>> {
    branches(s, qubits, basis)?
        .into_iter()
        .map(|b| {
            let post = embed(s.num_qubits(), qubits, basis.element(b.outcome), b.remainder.as_ref())?;
            Ok((b.probability, post))
        })
        .collect()
}

/// Probability that Bob's Bell test of `pair` fails after Eve's measurements
/// `eve` (applied in order, each branch kept).
fn failure_after(
    s: &StateVector,
    eve: &[(Vec<usize>, OrthonormalBasis)],
    pair: [usize; 2],
) -> Result<f64> {
    match eve.split_first() {
        None => {
            let dist = outcome_distribution(s, &pair, &OrthonormalBasis::bell())?;
            Ok(1.0 - dist[0])
        }
        Some(((qubits, basis), rest)) => {
            let mut total = 0.0;
            for (p, post) in collapse(s, qubits, basis)? {
                total += p * failure_after(&post, rest, pair)?;
            }
            Ok(total)
        }
    }
}

fn psi_plus() -> StateVector {
    OrthonormalBasis::bell().element(0).clone()
}

/// Per-pair failure for CNOT copying of a lone `|ψ⁺⟩`: qubits 2, 3 are Eve's ancillas.
fn cnot_clone_failure() -> Result<f64> {
    let s = psi_plus()
        .tensor(&StateVector::from_bits("00")?)?
        .cnot(0, 2)?
        .cnot(1, 3)?;
    failure_after(&s, &[], [0, 1])
}

/// Per-pair failure when both halves of a `|ψ⁺⟩` are measured in `{|0⟩, |1⟩}`.
fn computational_resend_failure() -> Result<f64> {
    let z = OrthonormalBasis::computational(1)?;
    failure_after(&psi_plus(), &[(vec![0], z.clone()), (vec![1], z)], [0, 1])
}

/// The cross-paired fixture: partners `a↔b`, `c↔d` in `|ψ⁺⟩_ab|ψ⁺⟩_cd`, Eve
/// Bell-measures `(a,c)` and `(b,d)`, Bob tests `(a,b)` and `(c,d)`.
///
/// Returns the per-pair failure probability.
pub fn cross_paired_bell_exact() -> Result<f64> {
    let s = psi_plus().tensor(&psi_plus())?;
    let bell = OrthonormalBasis::bell();
    let eve = [(vec![0, 2], bell.clone()), (vec![1, 3], bell)];
    Ok((failure_after(&s, &eve, [0, 1])? + failure_after(&s, &eve, [2, 3])?) / 2.0)
}

/// Samples the cross-paired fixture `trials` times. Each trial contributes Bob's
/// `(a,b)` test only, so trials are independent Bernoulli draws.
pub fn cross_paired_bell_mc(trials: usize, seed: u64) -> Result<McEstimate> {
    let root = RandomStream::new(seed);
    let bell = OrthonormalBasis::bell();
    let s = psi_plus().tensor(&psi_plus())?;
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let mut rng = root.split(t as u64);
            let (_, s) = crate::qcore::measure(&s, &[0, 2], &bell, &mut rng)?;
            let (_, s) = crate::qcore::measure(&s, &[1, 3], &bell, &mut rng)?;
            let (rec, _) = crate::qcore::measure(&s, &[0, 1], &bell, &mut rng)?;
            Ok(usize::from(rec.outcome_index != 0))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(McEstimate::from_counts(failures, trials, trials))
}

/// An element of the transmitted sequence before permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Item {
    Carrier { copy: usize, index: usize },
    Decoy { pair: usize, side: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Block {
    Copy(usize),
    Decoy(usize),
}

/// Pure-state model of the unpermuted sequence: `copies` carriers of `family`
/// (Alice's halves included, since they are entangled with Bob's) and decoys.
struct SequenceModel<'a> {
    family: &'a StateFamily,
    carrier: StateVector,
    items: Vec<Item>,
}

impl<'a> SequenceModel<'a> {
    fn new(family: &'a StateFamily, copies: usize, decoy_pairs: usize) -> Result<Self> {
        let l = family.spec.l;
        let mut items = Vec::new();
        for copy in 0..copies {
            items.extend((0..l).map(|index| Item::Carrier { copy, index }));
        }
        for pair in 0..decoy_pairs {
            items.extend((0..2).map(|side| Item::Decoy { pair, side }));
        }
        Ok(Self {
            family,
            carrier: family.state()?,
            items,
        })
    }

    fn block(item: Item) -> Block {
        match item {
            Item::Carrier { copy, .. } => Block::Copy(copy),
            Item::Decoy { pair, .. } => Block::Decoy(pair),
        }
    }

    /// Joint pure state of the blocks holding `wanted`, with each item's position in it.
    fn joint(&self, wanted: &[Item]) -> Result<(StateVector, Vec<usize>)> {
        let mut blocks: Vec<Block> = Vec::new();
        for &item in wanted {
            let b = Self::block(item);
            if !blocks.contains(&b) {
                blocks.push(b);
            }
        }
        let mut state: Option<StateVector> = None;
        let mut offsets = Vec::new();
        let mut width = 0;
        for &b in &blocks {
            let s = match b {
                Block::Copy(_) => self.carrier.clone(),
                Block::Decoy(_) => psi_plus(),
            };
            offsets.push(width);
            width += s.num_qubits();
            state = Some(match state {
                None => s,
                Some(acc) => acc.tensor(&s)?,
            });
        }
        let state = state.ok_or_else(|| Error::Contract("no items requested".into()))?;
        let positions = wanted
            .iter()
            .map(|&item| {
                let k = blocks.iter().position(|&b| b == Self::block(item)).expect("block listed");
                offsets[k]
                    + match item {
                        Item::Carrier { index, .. } => self.family.spec.m + index,
                        Item::Decoy { side, .. } => side,
                    }
            })
            .collect();
        Ok((state, positions))
    }
}

/// Eve's view of the decoy pair `(a, b)`: which in-flight items she measures
/// each of them with. Positions of `a`, `b` are uniform over ordered distinct pairs.
#[derive(Default)]
struct PairingWeights {
    together: usize,
    both_paired: usize,
    a_alone: usize,
    b_alone: usize,
    total: usize,
}

fn pairing_weights(len: usize) -> PairingWeights {
    let paired = 2 * (len / 2);
    let partner = |p: usize| (p < paired).then_some(p ^ 1);
    let mut w = PairingWeights::default();
    for pa in 0..len {
        for pb in 0..len {
            if pa == pb {
                continue;
            }
            w.total += 1;
            match (partner(pa), partner(pb)) {
                (Some(x), _) if x == pb => w.together += 1,
                (Some(_), Some(_)) => w.both_paired += 1,
                (None, Some(_)) => w.a_alone += 1,
                (Some(_), None) => w.b_alone += 1,
                (None, None) => unreachable!("only one position is unpaired"),
            }
        }
    }
    w
}

/// Exact per-pair failure when Eve Bell-measures consecutive positions of a
/// uniformly permuted sequence. Decoy pairs are exchangeable, so pair 0 stands
/// for all of them.
fn bell_pairing_failure(cfg: &ProtocolConfig) -> Result<f64> {
    let model = SequenceModel::new(&cfg.family, cfg.copies, cfg.decoy_pair_count())?;
    let a = Item::Decoy { pair: 0, side: 0 };
    let b = Item::Decoy { pair: 0, side: 1 };
    let others: Vec<Item> = model.items.iter().copied().filter(|&i| i != a && i != b).collect();
    let bell = OrthonormalBasis::bell();
    let w = pairing_weights(model.items.len());

    // Eve measures (a, b) together
    let together = {
        let (s, pos) = model.joint(&[a, b])?;
        failure_after(&s, &[(vec![pos[0], pos[1]], bell.clone())], [pos[0], pos[1]])?
    };
    let single = |partner_of_a: bool| -> Result<f64> {
        let mut sum = 0.0;
        for &x in &others {
            let (s, pos) = model.joint(&[a, b, x])?;
            let measured = if partner_of_a { vec![pos[0], pos[2]] } else { vec![pos[1], pos[2]] };
            sum += failure_after(&s, &[(measured, bell.clone())], [pos[0], pos[1]])?;
        }
        Ok(if others.is_empty() { 0.0 } else { sum / others.len() as f64 })
    };
    let a_alone = if w.a_alone > 0 { single(false)? } else { 0.0 };
    let b_alone = if w.b_alone > 0 { single(true)? } else { 0.0 };
    let mut both = 0.0;
    if w.both_paired > 0 {
        let mut count = 0usize;
        for &x in &others {
            for &y in &others {
                if x == y {
                    continue;
                }
                let (s, pos) = model.joint(&[a, b, x, y])?;
                let eve = [
                    (vec![pos[0], pos[2]], bell.clone()),
                    (vec![pos[1], pos[3]], bell.clone()),
                ];
                both += failure_after(&s, &eve, [pos[0], pos[1]])?;
                count += 1;
            }
        }
        both /= count as f64;
    }
    Ok((w.together as f64 * together
        + w.both_paired as f64 * both
        + w.a_alone as f64 * a_alone
        + w.b_alone as f64 * b_alone)
        / w.total as f64)
}

/// Exact per-pair failure when Bob's decoy positions land on a uniformly random
/// ordered pair of Eve's unpermuted fake sequence.
fn capture_replace_failure(cfg: &ProtocolConfig, fake: &StateFamily) -> Result<f64> {
    let model = SequenceModel::new(fake, cfg.copies, cfg.decoy_pair_count())?;
    let len = model.items.len();
    if len != cfg.transmitted_qubits() {
        return Err(Error::Contract(format!(
            "fake sequence has {len} qubits but {} are in flight",
            cfg.transmitted_qubits()
        )));
    }
    let mut pass = 0.0;
    for (s_pos, &x) in model.items.iter().enumerate() {
        for (t_pos, &y) in model.items.iter().enumerate() {
            if s_pos == t_pos {
                continue;
            }
            let (s, pos) = model.joint(&[x, y])?;
            pass += outcome_distribution(&s, &pos, &OrthonormalBasis::bell())?[0];
        }
    }
    Ok(1.0 - pass / (len * (len - 1)) as f64)
}

/// Exact probability that one decoy pair fails Bob's `ψ⁺` test under `strategy`,
/// averaged over Eve's outcomes and the uniform permutation.
pub fn detection_probability_exact(cfg: &ProtocolConfig, strategy: &AttackStrategy) -> Result<f64> {
    cfg.validate()?;
    if cfg.decoy_pair_count() == 0 {
        return Err(Error::Contract("no decoy pairs to fail".into()));
    }
    match strategy {
        AttackStrategy::None => Ok(0.0),
        AttackStrategy::CnotClone => cnot_clone_failure(),
        AttackStrategy::MeasureResend(ResendBasis::Computational) => computational_resend_failure(),
        AttackStrategy::MeasureResend(ResendBasis::BellRandomPairing) => bell_pairing_failure(cfg),
        AttackStrategy::CaptureReplace { fake } => {
            capture_replace_failure(cfg, fake.as_deref().unwrap_or(&cfg.family))
        }
    }
}

/// Runs `trials` sessions up to Bob's decoy check and pools the pair failures.
/// Trial `t` uses stream `t` of `seed`, so results do not depend on thread count.
pub fn detection_probability_mc(
    cfg: &ProtocolConfig,
    strategy: &AttackStrategy,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::Contract("at least one trial is needed".into()));
    }
    let root = RandomStream::new(seed);
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let check = transmit(cfg, strategy, &root.split(t as u64))?.check;
            Ok((check.failures, check.pairs))
        })
        .collect::<Result<Vec<(usize, usize)>>>()?;
    let (failures, pairs) = counts
        .into_iter()
        .fold((0, 0), |(f, p), (df, dp)| (f + df, p + dp));
    Ok(McEstimate::from_counts(failures, pairs, trials))
}
