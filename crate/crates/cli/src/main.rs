use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Entanglement-swapping deterministic secure quantum communication simulator.
#[derive(Parser, Debug)]
#[command(name = "dsqc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one session and write its transcript.
    Run(RunArgs),
    /// Exact and sampled detection probability for every attack strategy.
    AttackSweep(SweepArgs),
    /// Print the decode table of a state.
    Table(StateArgs),
    /// Check whether a state has the generic carrier form.
    Verify(VerifyArgs),
    /// Qubit efficiency under both counting conventions.
    Efficiency(EfficiencyArgs),
    /// Distribute a random key by sending a random message.
    Qkd(QkdArgs),
}

#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    /// Catalog state name.
    #[arg(long, conflicts_with = "spec_file")]
    pub state: Option<String>,
    /// JSON document describing a state of the family.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Log)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Log,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct SessionArgs {
    /// Decoy Bell pairs inserted into the sequence (default ⌈copies·l/2⌉).
    #[arg(long)]
    pub decoy_pairs: Option<usize>,
    /// Largest decoy error rate that does not abort.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long, default_value = "none")]
    pub attack: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Binary string, or hex with a 0x prefix.
    #[arg(long)]
    pub message: String,
    /// Carrier copies (default: just enough for the message).
    #[arg(long)]
    pub copies: Option<usize>,
    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 2)]
    pub copies: usize,
    #[arg(long)]
    pub decoy_pairs: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// JSON file with `m`, `l`, `n` and `amplitudes` (reals or `[re, im]` pairs).
    #[arg(long, conflicts_with_all = ["state", "spec_file"])]
    pub vector_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EfficiencyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, requires_all = ["l", "n"], conflicts_with_all = ["state", "spec_file"])]
    pub m: Option<usize>,
    #[arg(long, requires = "m")]
    pub l: Option<usize>,
    #[arg(long, requires = "m")]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct QkdArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Key length in bits.
    #[arg(long)]
    pub bits: usize,
    #[command(flatten)]
    pub session: SessionArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::AttackSweep(args) => commands::attack_sweep(args),
        Command::Table(args) => commands::table(args),
        Command::Verify(args) => commands::verify(args),
        Command::Efficiency(args) => commands::efficiency(args),
        Command::Qkd(args) => commands::qkd(args),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(failure) => {
            eprintln!("dsqc: {}", failure.message);
            ExitCode::from(failure.status as u8)
        }
    }
}
