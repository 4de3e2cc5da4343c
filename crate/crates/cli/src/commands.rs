use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dsqc_core::adversary::{
    cross_paired_bell_exact, cross_paired_bell_mc, detection_probability_exact,
    detection_probability_mc, AttackStrategy, McEstimate,
};
use dsqc_core::analysis::{efficiency as efficiency_report, Convention, EfficiencyReport};
use dsqc_core::protocol::{
    build_decode_table, run_protocol, ProtocolConfig, TranscriptDocument, SCHEMA_VERSION,
};
use dsqc_core::qcore::{format_bits, StateVector};
use dsqc_core::states::{
    named_state, verify_generic_form, FormVerdict, SpecDocument, StateFamily,
};
use dsqc_core::{Error, RandomStream};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{
    EfficiencyArgs, Format, OutputArgs, QkdArgs, RunArgs, SessionArgs, StateArgs, SweepArgs,
    VerifyArgs,
};

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Usage = 2,
    Abort = 3,
    Internal = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            status: Status::Usage,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Corruption { .. } | Error::Internal(_) => Status::Internal,
            _ => Status::Usage,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<Status, Failure>;

// sub-stream of the root seed that draws QKD messages; sessions use 1..=5
const QKD_MESSAGE_STREAM: u64 = 0;

fn load_family(args: &StateArgs) -> Result<StateFamily, Failure> {
    match (&args.state, &args.spec_file) {
        (Some(name), None) => Ok(named_state(name)?.family),
        (None, Some(path)) => {
            let text = read(path)?;
            let doc: SpecDocument = serde_json::from_str(&text)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            Ok(StateFamily::from_document(&doc)?)
        }
        (None, None) => Err(Failure::usage("one of --state or --spec-file is required")),
        (Some(_), Some(_)) => Err(Failure::usage("--state and --spec-file are exclusive")),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(output: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            status: Status::Internal,
            message: format!("{}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports always serialize");
    text.push('\n');
    text
}

/// Binary digits, or hex digits after a `0x` prefix (four bits each, MSB first).
pub fn parse_message(raw: &str) -> Result<String, Failure> {
    if let Some(hex) = raw.strip_prefix("0x").or_else(|| raw.strip_prefix("0X")) {
        let mut bits = String::with_capacity(4 * hex.len());
        for c in hex.chars() {
            let digit = c
                .to_digit(16)
                .ok_or_else(|| Failure::usage(format!("`{c}` is not a hex digit")))?;
            bits.push_str(&format_bits(digit as usize, 4));
        }
        return Ok(bits);
    }
    if let Some(c) = raw.chars().find(|c| *c != '0' && *c != '1') {
        return Err(Failure::usage(format!(
            "message must be binary or 0x-prefixed hex, found `{c}`"
        )));
    }
    Ok(raw.to_string())
}

fn session_config(
    family: StateFamily,
    copies: usize,
    session: &SessionArgs,
) -> Result<(ProtocolConfig, AttackStrategy), Failure> {
    let mut cfg = ProtocolConfig::new(family, copies)
        .with_threshold(session.threshold)
        .with_seed(session.seed);
    if let Some(pairs) = session.decoy_pairs {
        cfg = cfg.with_decoy_pairs(pairs);
    }
    cfg.validate()?;
    let attack: AttackStrategy = session.attack.parse()?;
    Ok((cfg, attack))
}

fn session_status(doc: &TranscriptDocument) -> Status {
    if doc.summary.aborted {
        Status::Abort
    } else if doc.summary.delivered {
        Status::Success
    } else {
        Status::Internal
    }
}

fn log_summary(doc: &TranscriptDocument) -> String {
    let s = &doc.summary;
    let rate = s
        .decoy_error_rate
        .map_or_else(|| "none".to_string(), |r| r.to_string());
    let recovered = s.recovered_message.as_deref().unwrap_or("none");
    format!(
        "summary aborted={} decoy_error_rate={rate} recovered={recovered} delivered={} decode_failures={}\n",
        s.aborted, s.delivered, s.decode_failures
    )
}

pub fn run(args: RunArgs) -> Outcome {
    let family = load_family(&args.state)?;
    let message = parse_message(&args.message)?;
    let n = family.spec.n;
    let copies = args.copies.unwrap_or(message.len().div_ceil(n));
    if copies * n < message.len() {
        return Err(Failure::usage(format!(
            "{} message bits do not fit in {copies} copies of {n} bits",
            message.len()
        )));
    }
    let (cfg, attack) = session_config(family, copies, &args.session)?;
    let transcript = run_protocol(&cfg, &message, &attack)?;
    let doc = TranscriptDocument::new(&cfg, &attack, transcript);
    let text = match args.state.output.format {
        Format::Json => doc.to_json() + "\n",
        Format::Log => doc.transcript.to_log() + &log_summary(&doc),
    };
    emit(&args.state.output, &text)?;
    Ok(session_status(&doc))
}

#[derive(Serialize)]
struct SweepRow {
    attack: String,
    exact: f64,
    monte_carlo: McEstimate,
}

#[derive(Serialize)]
struct SweepReport {
    schema_version: u32,
    state: SpecDocument,
    copies: usize,
    decoy_pairs: usize,
    trials: usize,
    seed: u64,
    strategies: Vec<SweepRow>,
    /// Two Bell pairs `(a,b)`, `(c,d)` measured by Eve as `(a,c)`, `(b,d)`.
    cross_paired_bell: SweepRow,
}

pub fn attack_sweep(args: SweepArgs) -> Outcome {
    if args.trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let family = load_family(&args.state)?;
    let mut cfg = ProtocolConfig::new(family, args.copies).with_seed(args.seed);
    if let Some(pairs) = args.decoy_pairs {
        cfg = cfg.with_decoy_pairs(pairs);
    }
    cfg.validate()?;
    let mut strategies = Vec::new();
    for attack in AttackStrategy::all() {
        strategies.push(SweepRow {
            attack: attack.name().to_string(),
            exact: detection_probability_exact(&cfg, &attack)?,
            monte_carlo: detection_probability_mc(&cfg, &attack, args.trials, args.seed)?,
        });
    }
    let report = SweepReport {
        schema_version: SCHEMA_VERSION,
        state: cfg.family.to_document(),
        copies: cfg.copies,
        decoy_pairs: cfg.decoy_pair_count(),
        trials: args.trials,
        seed: args.seed,
        strategies,
        cross_paired_bell: SweepRow {
            attack: "cross-paired-bell".into(),
            exact: cross_paired_bell_exact()?,
            monte_carlo: cross_paired_bell_mc(args.trials, args.seed)?,
        },
    };
    let text = match args.state.output.format {
        Format::Json => to_json(&report),
        Format::Log => {
            let mut out = format!(
                "sweep state={} copies={} decoy_pairs={} trials={} seed={}\n",
                cfg.family.name, report.copies, report.decoy_pairs, report.trials, report.seed
            );
            for row in report.strategies.iter().chain([&report.cross_paired_bell]) {
                let mc = &row.monte_carlo;
                let _ = writeln!(
                    out,
                    "detection attack={} exact={:.12} mc={:.6} se={:.6} failures={} pairs={}",
                    row.attack, row.exact, mc.estimate, mc.standard_error, mc.failures, mc.pairs
                );
            }
            out
        }
    };
    emit(&args.state.output, &text)?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct TableRow {
    first: String,
    second: String,
    bob: String,
    message: String,
}

#[derive(Serialize)]
struct TableReport {
    schema_version: u32,
    state: SpecDocument,
    rows: Vec<TableRow>,
}

pub fn table(args: StateArgs) -> Outcome {
    let family = load_family(&args)?;
    let table = build_decode_table(&family)?;
    let n = family.spec.n;
    let rows: Vec<TableRow> = table
        .rows()
        .into_iter()
        .map(|r| TableRow {
            first: r.first,
            second: r.second,
            bob: r.bob,
            message: format_bits(r.message as usize, n),
        })
        .collect();
    let text = match args.output.format {
        Format::Json => to_json(&TableReport {
            schema_version: SCHEMA_VERSION,
            state: family.to_document(),
            rows,
        }),
        Format::Log => {
            let mut out = String::new();
            for r in &rows {
                let _ = writeln!(
                    out,
                    "row first={} second={} bob={} message={}",
                    r.first, r.second, r.bob, r.message
                );
            }
            out
        }
    };
    emit(&args.output, &text)?;
    Ok(Status::Success)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Amplitudes {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

#[derive(Deserialize)]
struct VectorFile {
    m: usize,
    l: usize,
    n: usize,
    amplitudes: Amplitudes,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema_version: u32,
    m: usize,
    l: usize,
    n: usize,
    #[serde(flatten)]
    verdict: &'a FormVerdict,
}

pub fn verify(args: VerifyArgs) -> Outcome {
    let (vector, m, l, n) = match &args.vector_file {
        Some(path) => {
            let file: VectorFile = serde_json::from_str(&read(path)?)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let amps: Vec<Complex64> = match file.amplitudes {
                Amplitudes::Real(xs) => xs.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
                Amplitudes::Complex(xs) => xs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
            };
            if !amps.len().is_power_of_two() {
                return Err(Failure::usage(format!("{} amplitudes is not a power of two", amps.len())));
            }
            let qubits = amps.len().trailing_zeros() as usize;
            (StateVector::new(qubits, amps)?, file.m, file.l, file.n)
        }
        None => {
            let family = load_family(&args.state)?;
            let spec = &family.spec;
            (family.state()?, spec.m, spec.l, spec.n)
        }
    };
    let verdict = verify_generic_form(&vector, m, l, n);
    let text = match args.state.output.format {
        Format::Json => to_json(&VerifyReport {
            schema_version: SCHEMA_VERSION,
            m,
            l,
            n,
            verdict: &verdict,
        }),
        Format::Log => match &verdict {
            FormVerdict::Accepted(d) => format!(
                "accepted m={m} l={l} n={n} schmidt={} e=[{}]\n",
                fmt_coefficients(&d.schmidt_coefficients),
                d.e_labels.join(",")
            ),
            FormVerdict::Rejected {
                rejection,
                schmidt_coefficients,
            } => format!(
                "rejected m={m} l={l} n={n} schmidt={} reason=\"{rejection}\"\n",
                fmt_coefficients(schmidt_coefficients)
            ),
        },
    };
    emit(&args.state.output, &text)?;
    Ok(Status::Success)
}

fn fmt_coefficients(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.9}")).collect();
    format!("[{}]", parts.join(","))
}

pub fn efficiency(args: EfficiencyArgs) -> Outcome {
    let (m, l, n) = match (args.m, args.l, args.n) {
        (Some(m), Some(l), Some(n)) => (m, l, n),
        _ => {
            let spec = load_family(&args.state)?.spec;
            (spec.m, spec.l, spec.n)
        }
    };
    let reports: Vec<EfficiencyReport> = Convention::ALL
        .iter()
        .map(|&c| efficiency_report(m, l, n, c))
        .collect::<Result<_, _>>()?;
    let text = match args.state.output.format {
        Format::Json => to_json(&reports),
        Format::Log => {
            let mut out = String::new();
            for r in &reports {
                let convention = match r.convention {
                    Convention::TotalQubits => "total_qubits",
                    Convention::TransmittedQubits => "transmitted_qubits",
                };
                let _ = writeln!(
                    out,
                    "efficiency convention={convention} c={} q={} b={} eta={:.12}",
                    r.c, r.q, r.b, r.eta
                );
            }
            out
        }
    };
    emit(&args.state.output, &text)?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct QkdReport {
    schema_version: u32,
    bits: usize,
    alice_key: Option<String>,
    bob_key: Option<String>,
    session: TranscriptDocument,
}

pub fn qkd(args: QkdArgs) -> Outcome {
    let family = load_family(&args.state)?;
    let mut rng = RandomStream::new(args.session.seed).split(QKD_MESSAGE_STREAM);
    let message: String = (0..args.bits)
        .map(|_| if rng.uniform() < 0.5 { '0' } else { '1' })
        .collect();
    let copies = args.bits.div_ceil(family.spec.n);
    let (cfg, attack) = session_config(family, copies, &args.session)?;
    let transcript = run_protocol(&cfg, &message, &attack)?;
    let doc = TranscriptDocument::new(&cfg, &attack, transcript);
    let status = session_status(&doc);
    let (alice_key, bob_key) = if doc.summary.aborted {
        (None, None)
    } else {
        (Some(message), doc.summary.recovered_message.clone())
    };
    let text = match args.state.output.format {
        Format::Json => to_json(&QkdReport {
            schema_version: SCHEMA_VERSION,
            bits: args.bits,
            alice_key,
            bob_key,
            session: doc,
        }),
        Format::Log => {
            let mut out = doc.transcript.to_log() + &log_summary(&doc);
            match (&alice_key, &bob_key) {
                (Some(a), b) => {
                    let _ = writeln!(out, "key alice={a}");
                    let _ = writeln!(out, "key bob={}", b.as_deref().unwrap_or("none"));
                }
                _ => out.push_str("key withheld: session aborted\n"),
            }
            out
        }
    };
    emit(&args.state.output, &text)?;
    Ok(status)
}
