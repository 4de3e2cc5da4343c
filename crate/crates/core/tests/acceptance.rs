//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. Exits
//! non-zero if a criterion fails that is not listed in `KNOWN_FAILURES`, or if a
//! listed one stops failing in exactly the recorded way.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::time::Instant;

use dsqc_core::adversary::{
    cross_paired_bell_exact, cross_paired_bell_mc, detection_probability_exact,
    detection_probability_mc, AttackStrategy,
};
use dsqc_core::analysis::{efficiency, leakage_audit, Convention};
use dsqc_core::protocol::{
    build_decode_table, combined_state, outcome_triples, run_protocol, ProtocolConfig,
};
use dsqc_core::qcore::{
    bell_basis, cat_basis, measure, outcome_distribution, permute_qubits, tensor, PermutationMap,
    StateVector,
};
use dsqc_core::states::{named_state, verify_generic_form, FormRejection, FormVerdict, CATALOG};
use dsqc_core::RandomStream;
use nalgebra::DMatrix;
use num_complex::Complex64;

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Criteria expected to fail, with the detail text they must reproduce.
const KNOWN_FAILURES: [(usize, &str); 1] = [(
    6,
    "brown-swapped leaks: max TV 1.000000 (the other 7 states: 0)",
)];

// ---------------------------------------------------------------- oracles

/// Bell amplitudes from their textbook definition, indexed by the two bits.
fn bell_amp(label: &str, x: usize, y: usize) -> f64 {
    let h = FRAC_1_SQRT_2;
    match (label, x, y) {
        ("psi+", 0, 0) | ("psi+", 1, 1) | ("psi-", 0, 0) => h,
        ("psi-", 1, 1) => -h,
        ("phi+", 0, 1) | ("phi+", 1, 0) | ("phi-", 0, 1) => h,
        ("phi-", 1, 0) => -h,
        _ => 0.0,
    }
}

/// `Σ c · |B_a⟩_{0,2} |B_b⟩_{1,3} |z⟩_4`, written out amplitude by amplitude.
fn swapped_expansion(terms: &[(f64, &str, &str, usize)]) -> StateVector {
    let mut amps = vec![0.0; 32];
    for &(c, a, b, z) in terms {
        for (x, amp) in amps.iter_mut().enumerate() {
            let bit = |q: usize| (x >> (4 - q)) & 1;
            if bit(4) != z {
                continue;
            }
            *amp += c * bell_amp(a, bit(0), bit(2)) * bell_amp(b, bit(1), bit(3));
        }
    }
    StateVector::from_real(5, &amps).unwrap()
}

fn density(s: &StateVector) -> DMatrix<Complex64> {
    let v = DMatrix::from_iterator(s.amplitudes().len(), 1, s.amplitudes().iter().copied());
    &v * v.adjoint()
}

/// Partial trace keeping `keep` (in that order) of an `n`-qubit density matrix.
fn reduce(rho: &DMatrix<Complex64>, n: usize, keep: &[usize]) -> DMatrix<Complex64> {
    let k = keep.len();
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let index = |kept: usize, traced: usize| {
        let mut x = 0usize;
        for (pos, &q) in keep.iter().enumerate() {
            x |= ((kept >> (k - 1 - pos)) & 1) << (n - 1 - q);
        }
        for (pos, &q) in rest.iter().enumerate() {
            x |= ((traced >> (rest.len() - 1 - pos)) & 1) << (n - 1 - q);
        }
        x
    };
    DMatrix::from_fn(1 << k, 1 << k, |r, c| {
        (0..1usize << rest.len())
            .map(|t| rho[(index(r, t), index(c, t))])
            .sum()
    })
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..n {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

// ---------------------------------------------------------------- criteria

fn table_two() -> Outcome {
    let rows: BTreeSet<(&str, &str, &str, u32)> = [
        ("psi+", "psi+", "0", 0),
        ("psi+", "psi+", "1", 1),
        ("psi-", "psi-", "0", 0),
        ("psi-", "psi-", "1", 1),
        ("phi+", "phi+", "0", 0),
        ("phi+", "phi+", "1", 1),
        ("phi-", "phi-", "0", 0),
        ("phi-", "phi-", "1", 1),
        ("psi+", "psi-", "0", 1),
        ("psi+", "psi-", "1", 0),
        ("psi-", "psi+", "0", 1),
        ("psi-", "psi+", "1", 0),
        ("phi-", "phi+", "0", 1),
        ("phi-", "phi+", "1", 0),
        ("phi+", "phi-", "0", 1),
        ("phi+", "phi-", "1", 0),
    ]
    .into_iter()
    .collect();
    let family = named_state("ghz-like").unwrap().family;
    let table = build_decode_table(&family).unwrap();
    let built: Vec<_> = table.rows();
    let built_set: BTreeSet<(&str, &str, &str, u32)> = built
        .iter()
        .map(|r| (r.first.as_str(), r.second.as_str(), r.bob.as_str(), r.message))
        .collect();
    let pass = built.len() == 16 && built_set == rows;
    outcome(pass, format!("{} rows built, {} match the fixture", built.len(), built_set.intersection(&rows).count()))
}

fn ghz_like_expansions() -> Outcome {
    let c = 1.0 / (2.0 * 2f64.sqrt());
    let j0 = swapped_expansion(&[
        (c, "psi+", "psi+", 0),
        (c, "phi+", "phi+", 0),
        (c, "phi-", "phi-", 0),
        (c, "psi-", "psi-", 0),
        (c, "psi+", "psi-", 1),
        (-c, "phi+", "phi-", 1),
        (-c, "phi-", "phi+", 1),
        (c, "psi-", "psi+", 1),
    ]);
    let j1 = swapped_expansion(&[
        (c, "psi+", "psi-", 0),
        (c, "phi+", "phi-", 0),
        (c, "phi-", "phi+", 0),
        (c, "psi-", "psi+", 0),
        (c, "psi+", "psi+", 1),
        (-c, "phi+", "phi+", 1),
        (-c, "phi-", "phi-", 1),
        (c, "psi-", "psi-", 1),
    ]);
    let family = named_state("ghz-like").unwrap().family;
    let mut worst = 0.0f64;
    for (j, expected) in [(0, &j0), (1, &j1)] {
        let built = combined_state(&family, j).unwrap();
        for (a, b) in built.amplitudes().iter().zip(expected.amplitudes()) {
            worst = worst.max((a - b).norm());
        }
    }
    // each of the 8 terms carries ±1/(2√2): check coefficients by projection
    let bell = bell_basis();
    let mut coefficients_ok = true;
    for j in 0..2 {
        let built = combined_state(&family, j).unwrap();
        let mut nonzero = 0;
        for a in bell.elements() {
            for b in bell.elements() {
                for z in ["0", "1"] {
                    let probe = tensor(&tensor(a, b).unwrap(), &StateVector::from_bits(z).unwrap())
                        .unwrap()
                        .permute_qubits(&PermutationMap::new(vec![0, 2, 1, 3, 4]).unwrap())
                        .unwrap();
                    let amp = probe.inner_product(&built).unwrap();
                    if amp.norm() > 1e-12 {
                        nonzero += 1;
                        coefficients_ok &= (amp.norm() - c).abs() <= 1e-12;
                    }
                }
            }
        }
        coefficients_ok &= nonzero == 8;
    }
    outcome(
        worst <= 1e-12 && coefficients_ok,
        format!("max amplitude deviation {worst:.1e}, 8 terms of ±1/(2√2) each: {coefficients_ok}"),
    )
}

fn detection_fixtures() -> Outcome {
    let start = Instant::now();
    let cross = cross_paired_bell_exact().unwrap();
    let cfg = ProtocolConfig::new(named_state("ghz-like").unwrap().family, 2);
    let cnot = detection_probability_exact(&cfg, &AttackStrategy::CnotClone).unwrap();
    let cross_mc = cross_paired_bell_mc(10_000, 1).unwrap();
    let cnot_mc = detection_probability_mc(&cfg, &AttackStrategy::CnotClone, 10_000, 2).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = (cross - 0.75).abs() <= 1e-12
        && (cnot - 0.5).abs() <= 1e-12
        && cross_mc.agrees_with(0.75, 4.0)
        && cnot_mc.agrees_with(0.5, 4.0)
        && elapsed < 10.0;
    outcome(
        pass,
        format!(
            "cross-paired exact {cross:.12} MC {:.4}±{:.4}; cnot exact {cnot:.12} MC {:.4}±{:.4}; {elapsed:.2}s",
            cross_mc.estimate, cross_mc.standard_error, cnot_mc.estimate, cnot_mc.standard_error
        ),
    )
}

fn correctness() -> Outcome {
    let mut enumerated = 0usize;
    let mut bad_triples = 0usize;
    let mut sessions = 0usize;
    let mut failures = 0usize;
    for name in CATALOG {
        let family = named_state(name).unwrap().family;
        let table = build_decode_table(&family).unwrap();
        let psi = family.state().unwrap();
        let count = family.spec.message_count();
        for j in 0..count {
            for (key, _) in outcome_triples(&psi, family.encoding_state(j).unwrap(), family.spec.m, family.f_basis()).unwrap() {
                enumerated += 1;
                if table.lookup(&key.first, &key.second, &key.bob) != Some(j as u32) {
                    bad_triples += 1;
                }
            }
        }
        let n = family.spec.n;
        for seed in 0..1000u64 {
            let j = seed as usize % count;
            let message = dsqc_core::qcore::format_bits(j, n);
            let cfg = ProtocolConfig::new(family.clone(), 1).with_seed(seed);
            let t = run_protocol(&cfg, &message, &AttackStrategy::None).unwrap();
            sessions += 1;
            if !t.delivered() {
                failures += 1;
            }
        }
    }
    outcome(
        bad_triples == 0 && failures == 0,
        format!("{enumerated} outcome triples enumerated, {bad_triples} misdecoded; {sessions} sessions, {failures} failures"),
    )
}

fn efficiency_fixtures() -> Outcome {
    let mut fixtures = true;
    for k in 2..=8 {
        fixtures &= efficiency(k, k, k, Convention::TotalQubits).unwrap().eta == 1.0 / 6.0;
        fixtures &= efficiency(k, k, k, Convention::TransmittedQubits).unwrap().eta == 0.25;
    }
    let mut max_total = 0.0f64;
    for m in 2..=6 {
        for l in 1..=m {
            for n in 1..=m {
                if let Ok(r) = efficiency(m, l, n, Convention::TotalQubits) {
                    max_total = max_total.max(r.eta);
                }
            }
        }
    }
    outcome(
        fixtures && max_total <= 1.0 / 3.0,
        format!("m=n=l gives 1/6 and 1/4 exactly: {fixtures}; max total-qubit η over sweep {max_total:.4}"),
    )
}

fn zero_leakage() -> Outcome {
    let mut leaking = Vec::new();
    for name in CATALOG {
        let tv = leakage_audit(&named_state(name).unwrap().family).unwrap();
        if tv > 1e-12 {
            leaking.push((name, tv));
        }
    }
    if leaking.is_empty() {
        return outcome(true, "all 8 states: max TV 0");
    }
    let names: Vec<String> = leaking.iter().map(|(n, _)| n.to_string()).collect();
    let worst = leaking.iter().map(|(_, tv)| *tv).fold(0.0, f64::max);
    outcome(
        false,
        format!(
            "{} leaks: max TV {worst:.6} (the other {} states: 0)",
            names.join(", "),
            CATALOG.len() - leaking.len()
        ),
    )
}

fn verifier() -> Outcome {
    let start = Instant::now();
    let mut accepted = 0;
    for name in CATALOG {
        let s = named_state(name).unwrap();
        let spec = &s.family.spec;
        if verify_generic_form(&s.vector, spec.m, spec.l, spec.n).is_accepted() {
            accepted += 1;
        }
    }
    let product = StateVector::from_bits("000").unwrap();
    let product_rejected = matches!(
        verify_generic_form(&product, 2, 1, 1),
        FormVerdict::Rejected { rejection: FormRejection::SchmidtRank { .. }, .. }
    );
    let third = 1.0 / 3f64.sqrt();
    let w = StateVector::from_real(3, &[0.0, third, third, 0.0, third, 0.0, 0.0, 0.0]).unwrap();
    // oracle: Schmidt coefficients are square roots of the eigenvalues of Bob's reduced matrix
    let rho_b = reduce(&density(&w), 3, &[2]);
    let (a, d, b) = (rho_b[(0, 0)].re, rho_b[(1, 1)].re, rho_b[(0, 1)].norm());
    let disc = ((a - d).powi(2) + 4.0 * b * b).sqrt();
    let oracle = [((a + d + disc) / 2.0).sqrt(), ((a + d - disc) / 2.0).sqrt()];
    let w_rejected = match verify_generic_form(&w, 2, 1, 1) {
        FormVerdict::Rejected {
            rejection: FormRejection::UnequalCoefficients { .. },
            schmidt_coefficients,
        } => schmidt_coefficients
            .iter()
            .zip(oracle)
            .all(|(x, y)| (x - y).abs() <= 1e-9),
        _ => false,
    };
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        accepted == 8 && product_rejected && w_rejected && elapsed < 1.0,
        format!(
            "{accepted}/8 accepted; |000⟩ rejected by rank: {product_rejected}; W rejected with spectrum ({:.6}, {:.6}): {w_rejected}; {elapsed:.3}s",
            oracle[0], oracle[1]
        ),
    )
}

fn capture_replace() -> Outcome {
    let family = named_state("ghz-like").unwrap().family;
    let cfg = ProtocolConfig::new(family.clone(), 2);
    let attack = AttackStrategy::CaptureReplace { fake: None };
    let exact = detection_probability_exact(&cfg, &attack).unwrap();

    // Eve's fake block: two carrier halves then a ψ⁺ pair, unpermuted. Bob's decoy
    // pair sits at unpermuted positions (2, 3), so after undoing Π he tests the
    // fake qubits at (Π(2), Π(3)).
    let carrier = density(&family.state().unwrap());
    let half = reduce(&carrier, 3, &[2]);
    let psi_plus = density(bell_basis().element(0));
    let fake = kron(&kron(&half, &half), &psi_plus);
    let phi = bell_basis().element(0).clone();
    let all = permutations(4);
    let mut pass_sum = 0.0;
    for pi in &all {
        let rho = reduce(&fake, 4, &[pi[2], pi[3]]);
        let mut p = Complex64::new(0.0, 0.0);
        for r in 0..4 {
            for c in 0..4 {
                p += phi.amplitude(r).conj() * rho[(r, c)] * phi.amplitude(c);
            }
        }
        pass_sum += p.re;
    }
    let oracle = 1.0 - pass_sum / all.len() as f64;
    let mc = detection_probability_mc(&cfg, &attack, 10_000, 3).unwrap();
    outcome(
        (exact - oracle).abs() <= 1e-9 && mc.agrees_with(exact, 4.0),
        format!(
            "exact {exact:.12} vs {}-permutation density oracle {oracle:.12}; MC {:.4}±{:.4}",
            all.len(),
            mc.estimate,
            mc.standard_error
        ),
    )
}

fn engine_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = RandomStream::new(99);
    let random_state = |n: usize, rng: &mut RandomStream| {
        let amps = (0..1 << n)
            .map(|_| Complex64::new(rng.uniform() - 0.5, rng.uniform() - 0.5))
            .collect();
        StateVector::from_unnormalized(n, amps).unwrap()
    };
    let mut norm_ok = true;
    let mut round_trip_ok = true;
    for trial in 0..200 {
        let n = 1 + trial % 6;
        let a = random_state(n, &mut rng);
        let b = random_state(1 + trial % 3, &mut rng);
        let t = tensor(&a, &b).unwrap();
        norm_ok &= (t.norm_sqr() - 1.0).abs() <= 1e-12;
        let perm = PermutationMap::random(t.num_qubits(), &mut rng);
        let moved = permute_qubits(&t, &perm).unwrap();
        norm_ok &= (moved.norm_sqr() - 1.0).abs() <= 1e-12;
        let back = permute_qubits(&moved, &perm.inverse()).unwrap();
        round_trip_ok &= back
            .amplitudes()
            .iter()
            .zip(t.amplitudes())
            .all(|(x, y)| (x - y).norm() <= 1e-12);
        if t.num_qubits() >= 2 {
            let (_, post) = measure(&t, &[0, t.num_qubits() - 1], &bell_basis(), &mut rng).unwrap();
            norm_ok &= (post.norm_sqr() - 1.0).abs() <= 1e-12;
        }
    }
    let gram = (1..=6)
        .map(|k| cat_basis(k).unwrap().gram_deviation().unwrap())
        .fold(0.0, f64::max);
    let s = random_state(4, &mut rng);
    let basis = cat_basis(3).unwrap();
    let qubits = [3, 0, 2];
    let exact = outcome_distribution(&s, &qubits, &basis).unwrap();
    let samples = 100_000;
    let mut counts = vec![0usize; basis.len()];
    for _ in 0..samples {
        counts[measure(&s, &qubits, &basis, &mut rng).unwrap().0.outcome_index] += 1;
    }
    let mut worst_z = 0.0f64;
    for (k, &p) in exact.iter().enumerate() {
        let se = (p * (1.0 - p) / samples as f64).sqrt();
        let diff = (counts[k] as f64 / samples as f64 - p).abs();
        if se > 0.0 {
            worst_z = worst_z.max(diff / se);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        norm_ok && round_trip_ok && gram <= 1e-12 && worst_z <= 4.0 && elapsed < 60.0,
        format!(
            "normalization {norm_ok}, round trip {round_trip_ok}, cat Gram deviation {gram:.1e}, 10⁵-sample worst z {worst_z:.2}; {elapsed:.2}s"
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "decode table reproduces the 16 GHZ-like rows", table_two),
        (2, "GHZ-like swapped decompositions", ghz_like_expansions),
        (3, "cross-paired 0.75 and CNOT 0.5 detection", detection_fixtures),
        (4, "no-attack decoding is always correct", correctness),
        (5, "qubit efficiency fixtures", efficiency_fixtures),
        (6, "announcements leak nothing about the message", zero_leakage),
        (7, "generic-form verifier", verifier),
        (8, "capture-and-replace detection", capture_replace),
        (9, "engine properties", engine_properties),
    ];
    let mut unexpected = Vec::new();
    for (id, title, run) in criteria {
        let start = Instant::now();
        let result = run();
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id} [{status}] {title}: {} ({:.2}s)",
            result.detail,
            start.elapsed().as_secs_f64()
        );
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        match (result.pass, known) {
            (true, None) => {}
            (false, Some((_, detail))) if result.detail == *detail => {
                println!("criterion {id} failure is a recorded deviation");
            }
            _ => unexpected.push(id),
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance results for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
