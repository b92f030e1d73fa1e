//! Command-line front end. Every output file is written below `--out`.

mod cohort;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use emoscreen::analytics::{Emotion, DEFAULT_WINDOW};
use emoscreen::classify::ClassifierKind;
use emoscreen::net::DEFAULT_FEATURE_LAYER;
use emoscreen::pipeline::DEFAULT_FOLDS;

/// Seed used when neither `--seed` nor `EMOSCREEN_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_501;

#[derive(Debug, Parser)]
#[command(name = "emoscreen", version, about = "Emotion-evolution screening for cognitive impairment")]
pub struct Cli {
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = "emoscreen-out")]
    pub out: PathBuf,
    #[arg(long, global = true, env = "EMOSCREEN_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct NetOpts {
    /// Layer-graph JSON; the bundled MobileNetV2 topology by default.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// NWF1 weight file; fixed-seed random weights by default.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_FEATURE_LAYER)]
    pub layer: String,
    /// Cascade JSON; the built-in centre-surround cascade by default.
    #[arg(long)]
    pub cascade: Option<PathBuf>,
    #[arg(long, default_value_t = 1.25)]
    pub scale_factor: f64,
    #[arg(long, default_value_t = 24)]
    pub min_size: usize,
    #[arg(long, default_value_t = 2)]
    pub step: usize,
}

#[derive(Debug, Args, Clone)]
pub struct ModelOpts {
    /// Emotion classifier written by `train-emotion`.
    #[arg(long, conflicts_with = "stub")]
    pub emotion_model: Option<PathBuf>,
    /// Label every detected face with this emotion instead of classifying it.
    #[arg(long, value_parser = parse_emotion)]
    pub stub: Option<Emotion>,
    /// Record one-hot columns instead of the classifier's vote fractions.
    #[arg(long)]
    pub hard_label: bool,
    #[command(flatten)]
    pub net: NetOpts,
}

#[derive(Debug, Args, Clone)]
pub struct CohortOpts {
    /// Cohort manifest (JSON lines).
    #[arg(long)]
    pub cohort: PathBuf,
    /// Directory of `<id>.csv` evolution matrices; frames are recognized
    /// when absent.
    #[arg(long)]
    pub matrices: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelOpts,
}

#[derive(Debug, Args, Clone)]
pub struct SplitOpts {
    /// Random split with this training fraction instead of fixed counts.
    #[arg(long, conflicts_with_all = ["train_healthy", "train_impaired", "test_healthy", "test_impaired"])]
    pub fraction: Option<f64>,
    #[arg(long, default_value_t = 18)]
    pub train_healthy: usize,
    #[arg(long, default_value_t = 28)]
    pub train_impaired: usize,
    #[arg(long, default_value_t = 7)]
    pub test_healthy: usize,
    #[arg(long, default_value_t = 8)]
    pub test_impaired: usize,
}

#[derive(Debug, Args, Clone)]
pub struct WindowOpts {
    /// Width in frames of the selected feature window.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Select the window from every participant, test split included.
    #[arg(long)]
    pub paper_mode: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    HighSeparation,
    MediumNoise,
}

fn parse_emotion(s: &str) -> Result<Emotion, String> {
    s.parse().map_err(|e: emoscreen::analytics::AnalyticsError| e.to_string())
}

fn parse_classifier(s: &str) -> Result<ClassifierKind, String> {
    s.parse().map_err(|e: emoscreen::classify::ClassifyError| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect faces in one PGM/PPM image.
    DetectFace {
        #[arg(long)]
        image: PathBuf,
        #[command(flatten)]
        net: NetOpts,
    },
    /// Extract network features of the largest face in one image.
    ExtractFeatures {
        #[arg(long)]
        image: PathBuf,
        /// Use the whole image instead of the detected face.
        #[arg(long)]
        no_detect: bool,
        #[command(flatten)]
        net: NetOpts,
    },
    /// Train an emotion classifier from a labeled-frame manifest.
    TrainEmotion {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long, default_value = "svm", value_parser = parse_classifier)]
        classifier: ClassifierKind,
        #[command(flatten)]
        net: NetOpts,
    },
    /// Turn frame sequences into evolution matrices.
    Recognize {
        /// One participant's frame directory.
        #[arg(long, conflicts_with = "cohort", required_unless_present = "cohort")]
        frames_dir: Option<PathBuf>,
        /// Participant id for `--frames-dir`; the directory name by default.
        #[arg(long)]
        id: Option<String>,
        /// Recognize every participant of a cohort manifest.
        #[arg(long)]
        cohort: Option<PathBuf>,
        #[command(flatten)]
        model: ModelOpts,
    },
    /// Occurrence curves of both groups with CSV and SVG plots.
    CompareGroups {
        #[command(flatten)]
        cohort: CohortOpts,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// Train one screening classifier on the training split.
    TrainMci {
        #[command(flatten)]
        cohort: CohortOpts,
        #[command(flatten)]
        split: SplitOpts,
        #[command(flatten)]
        window: WindowOpts,
        #[arg(long, default_value = "svm", value_parser = parse_classifier)]
        classifier: ClassifierKind,
    },
    /// Train and test all four screening classifiers on one split.
    EvaluateMci {
        #[command(flatten)]
        cohort: CohortOpts,
        #[command(flatten)]
        split: SplitOpts,
        #[command(flatten)]
        window: WindowOpts,
    },
    /// Stratified k-fold error on a cohort or on labeled frames.
    CrossValidate {
        /// Cohort manifest (screening classifiers).
        #[arg(long, conflicts_with = "frames", required_unless_present = "frames")]
        cohort: Option<PathBuf>,
        #[arg(long)]
        matrices: Option<PathBuf>,
        /// Labeled-frame manifest (emotion classifiers).
        #[arg(long)]
        frames: Option<PathBuf>,
        /// One classifier; all four when omitted.
        #[arg(long, value_parser = parse_classifier)]
        classifier: Option<ClassifierKind>,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[command(flatten)]
        model: ModelOpts,
    },
    /// MAC counts of every convolution against standard-convolution cost.
    CostReport {
        #[arg(long)]
        topology: Option<PathBuf>,
        /// Last layer counted; the feature layer by default.
        #[arg(long, default_value = DEFAULT_FEATURE_LAYER)]
        upto: String,
    },
    /// Generate a scripted synthetic cohort.
    SynthCohort {
        #[arg(long, value_enum, default_value_t = Preset::HighSeparation)]
        preset: Preset,
        #[arg(long)]
        n_healthy: Option<usize>,
        #[arg(long)]
        n_impaired: Option<usize>,
        #[arg(long)]
        n_frames: Option<usize>,
        #[arg(long)]
        window_start: Option<usize>,
        #[arg(long)]
        window_width: Option<usize>,
        /// Also draw every participant's frames.
        #[arg(long)]
        with_frames: bool,
        /// Write this many labeled training frames per emotion.
        #[arg(long, default_value_t = 0)]
        labeled_frames: usize,
    },
}

/// Exit status classes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<emoscreen::pipeline::PipelineError> for CliError {
    fn from(e: emoscreen::pipeline::PipelineError) -> Self {
        match e {
            emoscreen::pipeline::PipelineError::Internal(_) => CliError::Internal(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::from(emoscreen::pipeline::PipelineError::from(e))
            }
        }
    )*};
}

data_error!(
    emoscreen::io::IoError,
    emoscreen::net::NetError,
    emoscreen::face::FaceError,
    emoscreen::classify::ClassifyError,
    emoscreen::analytics::AnalyticsError,
    emoscreen::tensor::TensorError
);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_timestamp(None)
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("emoscreen: error: {}", e.message().replace('\n', " "));
            ExitCode::from(e.code())
        }
    }
}
