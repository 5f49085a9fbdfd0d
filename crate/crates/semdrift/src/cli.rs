//! Command-line definitions.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use semdrift_core::chrono::ChainDirection;
use semdrift_core::corpus::TimeSpanConfig;
use semdrift_core::sgns::{LrSchedule, TrainingConfig, WindowMode};
use semdrift_core::shift::DetectionParams;
use semdrift_core::vocab::{DEFAULT_ALPHA, DEFAULT_MIN_COUNT};

use crate::commands::{self, AnalyzeOptions, IngestOptions, OutputFormat, TrainOptions};
use crate::error::{Error, Result};
use crate::synth_file::{self, SynthFile};

#[derive(Debug, Parser)]
#[command(name = "semdrift", version, about = "Detect meaning change with chained per-period word embeddings")]
pub struct Cli {
    /// Only print warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a corpus with planted meaning shifts from a TOML spec.
    Synth(SynthArgs),
    /// Tokenize a corpus into year spans and build the vocabulary.
    Ingest(IngestArgs),
    /// Train one embedding space per span, each starting from its neighbour.
    Train(TrainArgs),
    /// Score self-similarity drops of words against a random baseline.
    Analyze(AnalyzeArgs),
    /// Ingest, train and analyze in one go.
    Run(RunArgs),
    /// Write the input vectors of one span as word2vec text.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Receives corpus/, ground_truth.json and synth.toml.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    /// Directory of YYYY*.txt files or a JSON-lines file of {"year", "text"} records.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub start_year: i32,
    #[arg(long)]
    pub end_year: i32,
    #[arg(long, default_value_t = 2)]
    pub span_width: u32,
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    /// Exponent of the negative-sampling distribution.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Keep spans without documents instead of failing.
    #[arg(long)]
    pub allow_empty_spans: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = 200)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f32,
    /// Final learning rate of the linear decay.
    #[arg(long, default_value_t = 0.0001)]
    pub min_lr: f32,
    #[arg(long)]
    pub constant_lr: bool,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: u32,
    /// Comma-separated epoch count per span, overriding --epochs.
    #[arg(long, value_delimiter = ',')]
    pub span_epochs: Option<Vec<u32>>,
    /// Use the full window at every position.
    #[arg(long)]
    pub fixed_window: bool,
    /// Frequent-word subsampling threshold.
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long, value_enum, default_value = "reverse")]
    pub direction: Direction,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// More than one thread trains faster but not reproducibly.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Direction {
    Reverse,
    Forward,
}

impl From<Direction> for ChainDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Reverse => ChainDirection::Reverse,
            Direction::Forward => ChainDirection::Forward,
        }
    }
}

impl TrainingArgs {
    pub fn config(&self) -> TrainingConfig {
        TrainingConfig {
            dimension: self.dim,
            window: self.window,
            learning_rate: self.lr,
            negatives: self.negatives,
            epochs: self.epochs,
            lr_schedule: if self.constant_lr {
                LrSchedule::Constant
            } else {
                LrSchedule::LinearDecay { min_lr: self.min_lr }
            },
            window_mode: if self.fixed_window {
                WindowMode::Fixed
            } else {
                WindowMode::Dynamic
            },
            subsample: self.subsample,
            seed: self.seed,
            threads: self.threads,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Output directory of `ingest`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub training: TrainingArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// File with one word per line.
    #[arg(long)]
    pub words: Option<PathBuf>,
    /// A word to analyze; repeatable.
    #[arg(long = "word")]
    pub word: Vec<String>,
    /// Words in the baseline sample; at least 30. Defaults to min(5000, vocabulary).
    #[arg(long)]
    pub baseline_sample: Option<usize>,
    /// Draw the baseline only from the words in this file.
    #[arg(long)]
    pub baseline_words: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub baseline_seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub z_threshold: f64,
    #[arg(long, default_value_t = 0.1)]
    pub min_relative_drop: f64,
    #[arg(long, default_value_t = 5)]
    pub min_occurrences: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,json,svg")]
    pub format: Vec<OutputFormat>,
    /// `word<TAB>year` first attestations, marked on charts.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Defaults to <model>/analysis.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub detect: DetectArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub time: TimeArgs,
    /// Receives data/, model/ and analysis/.
    #[arg(long)]
    pub work: PathBuf,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub detect: DetectArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Span index or label.
    #[arg(long)]
    pub span: String,
    #[arg(long)]
    pub out: PathBuf,
}

impl TimeArgs {
    fn ingest_options(&self, out: &Path) -> Result<IngestOptions> {
        Ok(IngestOptions {
            corpus: self.corpus.clone(),
            out: out.to_path_buf(),
            time: TimeSpanConfig::new(self.start_year, self.end_year, self.span_width)?,
            min_count: self.min_count,
            alpha: self.alpha,
            allow_empty_spans: self.allow_empty_spans,
        })
    }
}

impl DetectArgs {
    fn options(&self, model: &Path, out: PathBuf) -> Result<AnalyzeOptions> {
        let mut words = self.word.clone();
        if let Some(p) = &self.words {
            words.extend(commands::read_word_list(p)?);
        }
        if words.is_empty() {
            return Err(Error::Usage("no words to analyze; pass --words or --word".into()));
        }
        let baseline_words = self
            .baseline_words
            .as_deref()
            .map(commands::read_word_list)
            .transpose()?;
        let dictionary = match &self.dictionary {
            Some(p) => commands::read_dictionary(p)?,
            None => Default::default(),
        };
        Ok(AnalyzeOptions {
            model: model.to_path_buf(),
            words,
            baseline_sample: self.baseline_sample,
            baseline_words,
            seed: self.baseline_seed,
            params: DetectionParams {
                z_threshold: self.z_threshold,
                min_relative_drop: self.min_relative_drop,
                min_occurrences: self.min_occurrences,
            },
            formats: self.format.clone(),
            out,
            dictionary,
        })
    }
}

fn train_options(data: &Path, model: &Path, t: &TrainingArgs) -> TrainOptions {
    TrainOptions {
        data: data.to_path_buf(),
        model: model.to_path_buf(),
        training: t.config(),
        direction: t.direction.into(),
        span_epochs: t.span_epochs.clone(),
    }
}

fn analyze_and_print(o: &AnalyzeOptions) -> Result<()> {
    let a = commands::analyze(o)?;
    for line in commands::summary_lines(&a) {
        println!("{line}");
    }
    for e in &a.errors {
        log::error!("{}: {}", e.word, e.message);
    }
    if a.reports.is_empty() {
        return Err(Error::Data("none of the requested words could be analyzed".into()));
    }
    log::info!("wrote {} to {}", a.outputs.join(", "), o.out.display());
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => {
            let mut file = SynthFile::read(&a.spec)?;
            if let Some(seed) = a.seed {
                file.seed = seed;
            }
            let s = synth_file::generate(&file, &a.out)?;
            for t in &s.ground_truth.targets {
                match t.shift_span {
                    Some(i) => println!("{}: shift in span {i} ({})", t.word, s.span_labels[i]),
                    None => println!("{}: no shift", t.word),
                }
            }
            Ok(())
        }
        Command::Ingest(a) => {
            commands::ingest(&a.time.ingest_options(&a.out)?)?;
            Ok(())
        }
        Command::Train(a) => {
            commands::train(&train_options(&a.data, &a.model, &a.training))?;
            Ok(())
        }
        Command::Analyze(a) => {
            let out = a.out.clone().unwrap_or_else(|| a.model.join("analysis"));
            analyze_and_print(&a.detect.options(&a.model, out)?)
        }
        Command::Run(a) => {
            let (data, model) = (a.work.join("data"), a.work.join("model"));
            let analyze = a.detect.options(&model, a.work.join("analysis"))?;
            commands::ingest(&a.time.ingest_options(&data)?)?;
            commands::train(&train_options(&data, &model, &a.training))?;
            analyze_and_print(&analyze)
        }
        Command::Export(a) => commands::export(&a.model, &a.span, &a.out),
    }
}
