mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "avdiar",
    version,
    about = "Audiovisual speaker diarization of two-character dialogue scenes"
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand. Flags win over the config file.
#[derive(Args, Debug, Default)]
pub struct Overrides {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for scene-level parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub theta_cut: Option<f64>,
    #[arg(long, global = true)]
    pub theta_sim: Option<f64>,
    /// Audio weight of the weighted-sum baseline.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub min_cover: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub fps: Option<f64>,
    #[arg(long, global = true)]
    pub srt: Option<PathBuf>,
    /// Shot table with labels.
    #[arg(long, global = true)]
    pub shots: Option<PathBuf>,
    /// Directory of `<index>.ppm` frames.
    #[arg(long, global = true)]
    pub frames: Option<PathBuf>,
    /// Packed block-histogram file.
    #[arg(long, global = true)]
    pub histograms: Option<PathBuf>,
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    /// Reference speakers (`utt_id,speaker`).
    #[arg(long, global = true)]
    pub reference: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Detect shots and shot labels from frames or packed histograms.
    Shots {
        /// Also write the frame histograms to this packed file.
        #[arg(long)]
        write_histograms: Option<PathBuf>,
    },
    /// List dialogue patterns and the scenes they delimit.
    Patterns,
    /// Diarize every dialogue scene and score against the reference.
    Diarize,
    /// Compare hypothesised shots against reference shots.
    ScoreShots {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Cut matching tolerance in frames.
        #[arg(long, default_value_t = 1)]
        tolerance: usize,
    },
    /// Generate a synthetic corpus with ground truth.
    Synth {
        #[arg(long)]
        scenes: Option<usize>,
        /// Also render frames.
        #[arg(long)]
        with_frames: bool,
        /// Start from the noisy preset instead of the clean one.
        #[arg(long)]
        noisy: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = commands::resolve(&cli.overrides).and_then(|cfg| match cli.command {
        Command::Shots { write_histograms } => commands::shots(&cfg, write_histograms.as_deref()),
        Command::Patterns => commands::patterns(&cfg),
        Command::Diarize => commands::diarize(&cfg),
        Command::ScoreShots {
            hyp,
            reference,
            tolerance,
        } => commands::score_shots(&cfg, &hyp, &reference, tolerance),
        Command::Synth {
            scenes,
            with_frames,
            noisy,
        } => commands::synth(&cfg, scenes, with_frames, noisy),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
