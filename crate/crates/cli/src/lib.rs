//! Command-line surface of sagvic: argument parsing, file formats, run
//! configuration and the five subcommands.

mod commands;
pub mod config;
pub mod encoder_file;
pub mod error;
pub mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sagvic::sagvicreg::Variant;

use config::{ExperimentArgs, GraphArgs, SimilarityArgs, SynthArgs, TrainArgs, VicregArgs};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "sagvic",
    version,
    about = "Affinity-weighted VICReg and structural embedding metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Structural similarity between two index-aligned embedding sets.
    Eval(EvalCmd),
    /// Laplacian eigenmap of a weighted graph given as a CSV matrix.
    Spectral(SpectralCmd),
    /// Train the toy network on synthetic clusters.
    Train(TrainCmd),
    /// Hierarchical Rand index of spectral clusterings against labels.
    Randindex(RandCmd),
    /// Seen versus unseen cluster distortion for both variants.
    DemoUnseen(DemoCmd),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvalCmd {
    /// First embedding set (`.csv` or EMB1).
    a: PathBuf,
    /// Second embedding set, rows aligned with the first.
    b: PathBuf,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the dendrogram of the first set as CSV.
    #[arg(long)]
    tree_a: Option<PathBuf>,
    /// Write the dendrogram of the second set as CSV.
    #[arg(long)]
    tree_b: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    similarity: SimilarityArgs,
}

#[derive(Debug, Args)]
struct SpectralCmd {
    /// Square, symmetric, non-negative weight matrix as headerless CSV.
    graph: PathBuf,
    #[arg(long)]
    dim: usize,
    /// Output embedding (`.csv` or EMB1).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep the constant eigenvector as the first column.
    #[arg(long)]
    include_trivial: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainCmd {
    /// vicreg or sag.
    #[arg(long)]
    variant: Option<Variant>,
    /// Trained network (binary ENC1 file).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-epoch loss CSV; defaults to the network path with a
    /// `history.csv` extension.
    #[arg(long)]
    history: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    synth: SynthArgs,
    #[command(flatten)]
    vicreg: VicregArgs,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Debug, Args)]
struct RandCmd {
    /// Embeddings (`.csv` or EMB1).
    emb: PathBuf,
    /// `item_id,level1,...,levelL` labels.
    hierarchy: PathBuf,
    /// Per-level JSON; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rand index at the finest level over a range of cluster counts.
    #[arg(long)]
    sweep_out: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    sweep_min: usize,
    #[arg(long, default_value_t = 20)]
    sweep_max: usize,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    graph: GraphArgs,
}

#[derive(Debug, Args)]
struct DemoCmd {
    /// Directory for the report and scatter files (created if missing).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[command(flatten)]
    synth: SynthArgs,
    #[command(flatten)]
    vicreg: VicregArgs,
    #[command(flatten)]
    train: TrainArgs,
    #[command(flatten)]
    similarity: SimilarityArgs,
}

/// Collapses clap's multi-line message into one line.
fn usage_line(err: &clap::Error) -> String {
    let text = err.render().to_string();
    let mut parts = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.starts_with("Usage:") || line.starts_with("For more information") {
            break;
        }
        if !line.is_empty() {
            parts.push(line.trim_start_matches("error:").trim());
        }
    }
    parts.join(" ")
}

/// Parses `args` (program name first) and runs the chosen command.
pub fn run<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(usage_line(&e))),
    };
    match cli.command {
        Command::Eval(c) => commands::eval(c),
        Command::Spectral(c) => commands::spectral(c),
        Command::Train(c) => commands::train(c),
        Command::Randindex(c) => commands::randindex(c),
        Command::DemoUnseen(c) => commands::demo_unseen(c),
    }
}
