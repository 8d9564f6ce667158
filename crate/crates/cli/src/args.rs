use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Exact audits of communication protocols with a prover and quantum advice.
#[derive(Debug, Parser)]
#[command(name = "qmacc", version)]
pub struct Cli {
    /// Root seed; every random draw in the run derives from it.
    #[arg(long, global = true, env = "QMACC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, env = "QMACC_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "QMACC_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Shots for Monte-Carlo cross-checks; 0 skips them.
    #[arg(long, global = true, env = "QMACC_SHOTS", default_value_t = 10_000)]
    pub shots: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "QMACC_JOBS", value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measurement-damage lemmas.
    #[command(subcommand)]
    Lemma(LemmaCmd),
    /// Witness amplification.
    #[command(subcommand)]
    Amplify(AmplifyCmd),
    /// Removing the prover from a one-way protocol.
    #[command(subcommand)]
    Demerlin(DemerlinCmd),
    /// Random access codes with a prover.
    #[command(subcommand)]
    Rac(RacCmd),
    /// Fixing randomized and quantum advice.
    #[command(subcommand)]
    Advice(AdviceCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lemma(LemmaCmd::GoodAsNew(_)) => "lemma good-as-new",
            Command::Lemma(LemmaCmd::Union(_)) => "lemma union",
            Command::Lemma(LemmaCmd::OrBound(_)) => "lemma or-bound",
            Command::Amplify(AmplifyCmd::Plan(_)) => "amplify plan",
            Command::Demerlin(DemerlinCmd::Build(_)) => "demerlin build",
            Command::Demerlin(DemerlinCmd::Run(_)) => "demerlin run",
            Command::Rac(RacCmd::Audit(_)) => "rac audit",
            Command::Rac(RacCmd::Reduce(_)) => "rac reduce",
            Command::Rac(RacCmd::Fingerprint(_)) => "rac fingerprint",
            Command::Advice(AdviceCmd::MaFix(_)) => "advice ma-fix",
            Command::Advice(AdviceCmd::QmaFix(_)) => "advice qma-fix",
            Command::Advice(AdviceCmd::QcmaTrain(_)) => "advice qcma-train",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum LemmaCmd {
    GoodAsNew(GoodAsNewArgs),
    Union(UnionArgs),
    OrBound(OrBoundArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GoodAsNewInstance {
    /// `|0⟩` measured by the projector onto `|+⟩`, where the bound is tight.
    Equality,
    /// A seeded random state and effect.
    Random,
}

#[derive(Debug, Args)]
pub struct GoodAsNewArgs {
    #[arg(long, value_enum, default_value_t = GoodAsNewInstance::Equality)]
    pub instance: GoodAsNewInstance,
    /// Qubits of the random instance.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub qubits: u8,
}

#[derive(Debug, Args)]
pub struct UnionArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub max_qubits: u8,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u16).range(1..))]
    pub max_t: u16,
}

#[derive(Debug, Args)]
pub struct OrBoundArgs {
    /// Witness widths of the tight instance, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "1")]
    pub witness_qubits: Vec<usize>,
    /// Additional seeded random instances.
    #[arg(long, default_value_t = 0)]
    pub random: u64,
}

#[derive(Debug, Subcommand)]
pub enum AmplifyCmd {
    Plan(PlanArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AmplifyToy {
    None,
    /// One advice qubit, one witness qubit, padded to the planned width.
    Coin,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long, default_value_t = 1)]
    pub a: usize,
    /// Witness widths, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "2")]
    pub w: Vec<usize>,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub base_error: f64,
    #[arg(long)]
    pub c_ell: Option<f64>,
    #[arg(long)]
    pub c_u: Option<f64>,
    /// Audit the plan on a toy verifier.
    #[arg(long, value_enum, default_value_t = AmplifyToy::None)]
    pub toy: AmplifyToy,
}

#[derive(Debug, Subcommand)]
pub enum DemerlinCmd {
    Build(DemerlinArgs),
    Run(DemerlinArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemerlinToy {
    /// Two-bit quantum random access code with a one-qubit witness.
    Rac2,
    /// Coin advice with a one-qubit witness.
    Coin,
}

#[derive(Debug, Args)]
pub struct DemerlinArgs {
    #[arg(long, value_enum, default_value_t = DemerlinToy::Rac2)]
    pub toy: DemerlinToy,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    #[arg(long, default_value_t = 1)]
    pub u: usize,
}

#[derive(Debug, Subcommand)]
pub enum RacCmd {
    Audit(RacAuditArgs),
    Reduce(RacReduceArgs),
    Fingerprint(FingerprintArgs),
}

#[derive(Debug, Args)]
pub struct RacAuditArgs {
    /// Input lengths, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "8")]
    pub n: Vec<usize>,
    /// Block widths, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "4")]
    pub w: Vec<usize>,
    /// Number of blocks; defaults to the fewest that cover the input.
    #[arg(long)]
    pub a: Option<usize>,
    /// Search seed for the code; defaults to the shipped code.
    #[arg(long)]
    pub code_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RacReduceArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub w: usize,
}

#[derive(Debug, Args)]
pub struct FingerprintArgs {
    /// String length in bits.
    #[arg(long, default_value_t = 8)]
    pub len: usize,
    /// Tag width in bits.
    #[arg(long, default_value_t = 6)]
    pub m: u32,
}

#[derive(Debug, Subcommand)]
pub enum AdviceCmd {
    MaFix(MaFixArgs),
    QmaFix(QmaFixArgs),
    QcmaTrain(QcmaTrainArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MaToy {
    Parity,
    AdviceFree,
}

#[derive(Debug, Args)]
pub struct MaFixArgs {
    #[arg(long, value_enum, default_value_t = MaToy::Parity)]
    pub toy: MaToy,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub witness_bits: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QmaToy {
    Rotated,
    WitnessIndependent,
}

#[derive(Debug, Args)]
pub struct QmaFixArgs {
    #[arg(long, value_enum, default_value_t = QmaToy::Rotated)]
    pub toy: QmaToy,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub witness_bits: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QcmaToy {
    Bell,
    Blind,
}

#[derive(Debug, Args)]
pub struct QcmaTrainArgs {
    #[arg(long, value_enum, default_value_t = QcmaToy::Bell)]
    pub toy: QcmaToy,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub adv_qubits: Option<usize>,
    #[arg(long)]
    pub witness_bits: Option<usize>,
}
