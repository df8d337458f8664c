//! `simt`: oracle programs, delay metrics, simulation and imitation training
//! for simultaneous translation, from plain token files.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use simt_core::corpus::ReorderRule;
use simt_core::simulate::Decoding;

#[derive(Parser, Debug)]
#[command(name = "simt", version, about = "Simultaneous translation programs, metrics and policies")]
struct Cli {
    /// Where to write the run manifest. Defaults to `<out>.manifest.json`, or
    /// standard error when the command writes to standard output.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Generate a synthetic parallel corpus with gold alignments.
    Synth(SynthArgs),
    /// Build oracle READ/WRITE programs from word alignments.
    Oracle(OracleArgs),
    /// Check programs for validity.
    Validate(ValidateArgs),
    /// Randomly permute interior actions of each program.
    Perturb(PerturbArgs),
    /// Move the last READ to the front `d` times.
    Delay(DelayArgs),
    /// Build wait-k programs for a corpus.
    Waitk(WaitkArgs),
    /// Delay metrics (and BLEU when hypotheses are given) as TSV.
    Metrics(MetricsArgs),
    /// Decode sources with a trained policy bundle.
    Simulate(SimulateArgs),
    /// Render programs as source/target chunk tables.
    Trace(TraceArgs),
    /// Train programmer and interpreter policies by imitation.
    Train(TrainArgs),
    /// Score a policy bundle on a corpus.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug, Serialize)]
struct CorpusArgs {
    /// Source token file, one sentence per line.
    #[arg(long)]
    src: PathBuf,
    /// Target token file, one sentence per line.
    #[arg(long)]
    tgt: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Reorder {
    Monotone,
    FinalToSecond,
}

impl From<Reorder> for ReorderRule {
    fn from(r: Reorder) -> Self {
        match r {
            Reorder::Monotone => ReorderRule::Monotone,
            Reorder::FinalToSecond => ReorderRule::FinalToSecond,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DecodeMode {
    Greedy,
    Sample,
}

impl From<DecodeMode> for Decoding {
    fn from(d: DecodeMode) -> Self {
        match d {
            DecodeMode::Greedy => Decoding::Greedy,
            DecodeMode::Sample => Decoding::Sample,
        }
    }
}

fn probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is not in [0, 1]"))
    }
}

fn positive_rate(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a.is_finite() {
        Ok(a)
    } else {
        Err(format!("{a} is not a positive rate"))
    }
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    /// Output directory for src.txt, tgt.txt, align.txt, vocab.json and corpus.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Number of sentence pairs.
    #[arg(long, short)]
    n: usize,
    /// Index of the first pair; disjoint ranges give disjoint splits.
    #[arg(long, default_value_t = 0)]
    offset: u64,
    #[arg(long, default_value_t = 64)]
    vocab_size: usize,
    #[arg(long, default_value_t = 5)]
    min_len: usize,
    #[arg(long, default_value_t = 15)]
    max_len: usize,
    #[arg(long, value_enum, default_value_t = Reorder::FinalToSecond)]
    reorder: Reorder,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Pharaoh alignment file (`i-j` pairs, 0-indexed).
    #[arg(long)]
    align: PathBuf,
    /// Skip the first-word/last-word anchoring links.
    #[arg(long)]
    no_anchor: bool,
    /// Program file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Oracle statistics (TSV); standard error when absent.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    /// Program file; `-` reads standard input.
    #[arg(long, default_value = "-")]
    programs: PathBuf,
    /// Source file giving the expected READ counts.
    #[arg(long, requires = "tgt")]
    src: Option<PathBuf>,
    /// Target file giving the expected WRITE counts.
    #[arg(long, requires = "src")]
    tgt: Option<PathBuf>,
    /// Per-line report (TSV); standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PerturbArgs {
    #[arg(long, default_value = "-")]
    programs: PathBuf,
    /// Probability that an interior position takes part in the permutation.
    #[arg(long, default_value_t = 0.15, value_parser = probability)]
    beta3: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct DelayArgs {
    #[arg(long, default_value = "-")]
    programs: PathBuf,
    #[arg(long, short)]
    d: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct WaitkArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, short, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MetricsArgs {
    #[arg(long)]
    programs: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Hypothesis file; adds a BLEU column and measures delay against its lengths.
    #[arg(long)]
    hyp: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    /// Policy bundle written by `train`.
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    src: PathBuf,
    /// Play these programs back instead of running the learned programmer.
    #[arg(long)]
    programs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DecodeMode::Greedy)]
    decoding: DecodeMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TraceArgs {
    #[arg(long)]
    programs: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct DemoArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Alignment file; oracle programs are derived from it.
    #[arg(long, conflicts_with = "programs", required_unless_present = "programs")]
    align: Option<PathBuf>,
    /// Ready-made demonstration programs.
    #[arg(long)]
    programs: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    demos: DemoArgs,
    #[arg(long, requires = "dev_tgt")]
    dev_src: Option<PathBuf>,
    #[arg(long, requires = "dev_src")]
    dev_tgt: Option<PathBuf>,
    /// Dev alignments; required with --dev-src when training from alignments.
    #[arg(long, conflicts_with = "dev_programs")]
    dev_align: Option<PathBuf>,
    #[arg(long)]
    dev_programs: Option<PathBuf>,
    /// Policy bundle to write.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch history (TSV); standard error when absent.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Target perturbation probability.
    #[arg(long, default_value_t = 0.05, value_parser = probability)]
    beta1: f64,
    /// Action perturbation probability for the programmer's inputs.
    #[arg(long, default_value_t = 0.15, value_parser = probability)]
    beta2: f64,
    /// Valid program perturbation probability for the interpreter's inputs.
    #[arg(long, default_value_t = 0.15, value_parser = probability)]
    beta3: f64,
    /// Initial learning rate of both policies.
    #[arg(long, default_value_t = 0.001, value_parser = positive_rate)]
    alpha: f64,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 1)]
    batch_size: usize,
    /// Stop once either policy's rate has been halved this many times.
    #[arg(long, default_value_t = 4)]
    max_decays: usize,
    /// First imitate wait-k programs, then finetune on the demonstrations.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    warm_start_k: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[command(flatten)]
    demos: DemoArgs,
    /// Run the interpreter under the given programs instead of the learned programmer.
    #[arg(long)]
    playback: bool,
    #[arg(long, value_enum, default_value_t = DecodeMode::Greedy)]
    decoding: DecodeMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hypotheses, one per line, in target tokens.
    #[arg(long)]
    hyp_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// Outcome of a run that completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The run finished but found invalid programs.
    Invalid,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Invalid) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
