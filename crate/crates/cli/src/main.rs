//! `ugc`: organize user-generated recordings into aligned events.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags, missing inputs),
//! 3 on data or constraint errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ugc", version, about = "Cluster, align and rank user-generated audio clips")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus of overlapping noisy clips with a ground-truth manifest.
    Synth(SynthArgs),
    /// Fingerprint WAV files into a binary index.
    Index(IndexArgs),
    /// Query WAV files against an index and write their matching lists.
    Match(MatchArgs),
    /// Cluster, align, segment and rank a directory of WAV files.
    Pipeline(PipelineArgs),
    /// Select and train a false-match classifier from labeled matches.
    Train(TrainArgs),
    /// Label the primary matches of a matches file with a trained model.
    Classify(ClassifyArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 5)]
    pub events: usize,
    /// Clips per event.
    #[arg(long, default_value_t = 6)]
    pub clips: usize,
    /// Event length in seconds.
    #[arg(long, default_value_t = 120.0)]
    pub event_duration: f64,
    #[arg(long, default_value_t = 25.0)]
    pub clip_min: f64,
    #[arg(long, default_value_t = 40.0)]
    pub clip_max: f64,
    /// Minimum overlap of consecutive clips, in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub min_overlap: f64,
    #[arg(long, default_value_t = 10.0)]
    pub snr_min: f64,
    #[arg(long, default_value_t = 30.0)]
    pub snr_max: f64,
    /// Overridden by UGC_SEED.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw burst pitches from an equal-tempered scale.
    #[arg(long)]
    pub scale_pitches: bool,
    /// Seconds of material each event borrows from the previous one.
    #[arg(long, default_value_t = 0.0)]
    pub shared_passage: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct IndexArgs {
    /// WAV files or directories of WAV files.
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct MatchArgs {
    /// Query WAV files or directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Existing index; without it the inputs are matched against each other.
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PipelineArgs {
    /// Directory of WAV files (or set `input` in the config).
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Classifier used to drop false matches before clustering.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write every segment cut as a WAV file into this directory.
    #[arg(long)]
    pub emit_cuts: Option<PathBuf>,
    /// Write training samples gathered from repetitions and confirmed clusters.
    #[arg(long)]
    pub expansion_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Matches file written by `ugc match`.
    #[arg(long)]
    pub matches: PathBuf,
    /// Ground-truth manifest written by `ugc synth`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `logreg`, `knn` or `both`.
    #[arg(long)]
    pub family: Option<String>,
    /// Restrict the search to one feature subset (S1..S4).
    #[arg(long)]
    pub subset: Option<String>,
    /// Comma-separated regularization values for logistic regression.
    #[arg(long)]
    pub c_grid: Option<String>,
    /// Comma-separated odd neighbor counts for kNN.
    #[arg(long)]
    pub k_grid: Option<String>,
    /// Keep models that accept wrong matches in the running.
    #[arg(long)]
    pub allow_wrong: bool,
    /// Extra samples (JSON) from `ugc pipeline --expansion-out`.
    #[arg(long)]
    pub extra_samples: Vec<PathBuf>,
    /// Overridden by UGC_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Cross-validation rows as JSON.
    #[arg(long)]
    pub cv_report: Option<PathBuf>,
}

#[derive(Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub matches: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Index(a) => commands::index(a),
        Command::Match(a) => commands::match_files(a),
        Command::Pipeline(a) => commands::pipeline(a),
        Command::Train(a) => commands::train(a),
        Command::Classify(a) => commands::classify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<commands::Usage>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
