//! `genekg` — build a knowledge graph from gene-expression studies and
//! domain knowledge, learn patient embeddings over it, and evaluate
//! disease-prediction experiments.
//!
//! Exit codes: 0 success, 1 internal error, 2 input/config error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Pipeline;

#[derive(Parser)]
#[command(
    name = "genekg",
    version,
    about = "Gene-expression knowledge graphs for disease prediction"
)]
struct Cli {
    /// Suppress progress notes on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic synthetic multi-study suite.
    Synth(SynthArgs),
    /// Build the knowledge graph and write it as a triple file.
    BuildKg(KgArgs),
    /// Generate the walk corpus and train the embedding model.
    Embed(EmbedArgs),
    /// Produce one vector per patient from trained embeddings.
    Represent(RepresentArgs),
    /// Run the enrichment cross-validation experiment matrix.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// Directory the suite (and its pipeline.toml) is written to.
    #[arg(long)]
    out_dir: PathBuf,
    /// Master seed for the generator.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Mean shift of signal genes in case samples, in noise-σ units.
    #[arg(long, default_value_t = 2.0)]
    effect_size: f64,
    /// Signal genes planted per dataset.
    #[arg(long, default_value_t = 5)]
    signal_genes: usize,
    /// Samples in the target dataset.
    #[arg(long, default_value_t = 60)]
    target_samples: usize,
    /// Samples in each auxiliary dataset.
    #[arg(long, default_value_t = 60)]
    aux_samples: usize,
}

#[derive(Args)]
pub struct KgArgs {
    /// Pipeline configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Expression encoder: links or binning.
    #[arg(long)]
    encoder: Option<String>,
    /// Fraction of distinct values that becomes a gene's bin count.
    #[arg(long)]
    binning_percentage: Option<f64>,
    /// Build from expression data alone (the ablation graph).
    #[arg(long)]
    no_domain_knowledge: bool,
    /// Triple file destination (default: <output.dir>/kg.nt).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Build report destination (default: <output.dir>/kg_report.txt).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
pub struct EmbedArgs {
    /// Pipeline configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Triple file to embed (default: <output.dir>/kg.nt).
    #[arg(long)]
    kg: Option<PathBuf>,
    /// Walk start set: patients-and-genes or genes.
    #[arg(long)]
    walk_entities: Option<String>,
    /// Walks per start entity.
    #[arg(long)]
    walks: Option<usize>,
    /// Maximum edges per walk.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    walk_seed: Option<u64>,
    /// Embedding dimensionality.
    #[arg(long)]
    dimension: Option<usize>,
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    train_seed: Option<u64>,
    /// Training workers; 1 guarantees bitwise determinism.
    #[arg(long)]
    workers: Option<usize>,
    /// Corpus destination (default: <output.dir>/corpus.txt).
    #[arg(long)]
    corpus_out: Option<PathBuf>,
    /// Embedding text file destination (default: <output.dir>/embeddings.txt).
    #[arg(long)]
    embeddings_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RepresentArgs {
    /// Pipeline configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Embedding text file (default: <output.dir>/embeddings.txt).
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Representation strategy: direct or weighted-average.
    #[arg(long, default_value = "direct")]
    strategy: String,
    /// Patient matrix destination (default: <output.dir>/patients.tsv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// Pipeline configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the number of folds.
    #[arg(long)]
    k: Option<usize>,
    /// Override the fold seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated variant list (default: config's experiment.variants).
    #[arg(long)]
    variants: Option<String>,
    /// Run KG variants both with and without domain knowledge.
    #[arg(long)]
    ablation: bool,
    /// Force all KG variants to skip domain knowledge.
    #[arg(long)]
    no_domain_knowledge: bool,
    /// Training workers; 1 guarantees byte-identical reports.
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination (default: <output.dir>/report.csv).
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Structured report destination (default: <output.dir>/report.txt).
    #[arg(long)]
    out_report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let result = match &cli.command {
        Command::Synth(args) => commands::cmd_synth(args, quiet).map_err(input_error),
        Command::BuildKg(args) => with_pipeline(&args.config, |p| {
            commands::cmd_build_kg(p, args, quiet)
        }),
        Command::Embed(args) => with_pipeline(&args.config, |p| commands::cmd_embed(p, args, quiet)),
        Command::Represent(args) => {
            with_pipeline(&args.config, |p| commands::cmd_represent(p, args, quiet))
        }
        Command::Experiment(args) => {
            with_pipeline(&args.config, |p| commands::cmd_experiment(p, args, quiet))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(1)
        }
    }
}

enum CliError {
    /// Bad input files, paths, or configuration — exit code 2.
    Input(anyhow::Error),
    /// Anything that goes wrong after inputs validated — exit code 1.
    Internal(anyhow::Error),
}

fn input_error(e: anyhow::Error) -> CliError {
    CliError::Input(e)
}

/// Load + validate the config (input errors), then run the command body.
/// Command bodies classify their own failures: loading/parsing inputs is an
/// input error, later pipeline failures are internal.
fn with_pipeline<F>(config_path: &std::path::Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&Pipeline) -> anyhow::Result<()>,
{
    let pipeline = Pipeline::load(config_path).map_err(CliError::Input)?;
    body(&pipeline).map_err(classify)
}

/// Input-shaped failures (missing paths, parse errors, bad flag values)
/// exit with 2; the rest are internal.
fn classify(error: anyhow::Error) -> CliError {
    let text = format!("{error:#}");
    let input_markers = [
        "does not exist",
        "cannot open",
        "cannot read",
        "cannot create",
        "line ",
        "must be",
        "config is missing",
        "unknown experiment variant",
        "needs at least",
        "not among the inputs",
        "duplicate",
        "no experiment variants",
        "synth config",
        "experiment configuration",
        "fold configuration",
    ];
    if input_markers.iter().any(|m| text.contains(m)) {
        CliError::Input(error)
    } else {
        CliError::Internal(error)
    }
}
