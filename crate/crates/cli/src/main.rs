use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod settings;

/// Character-level word breaking for domain names and hashtags.
#[derive(Debug, Parser)]
#[command(name = "wordbreak", version, about)]
pub struct Cli {
    /// TOML file with defaults for training and model settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for initialization and shuffling.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment camel-case domain names by case and write a dataset.
    Prepare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Lines of `raw<TAB>segmented form` that override the case rule.
        #[arg(long)]
        corrections: Option<PathBuf>,
    },
    /// Build a pre-training dataset from space-separated entity names.
    Synth {
        #[arg(long)]
        entities: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Follow every example with its lowercase twin.
        #[arg(long)]
        mixed_case: bool,
        /// Dataset whose frequent characters form the reference vocabulary;
        /// names with too many characters outside it are dropped.
        #[arg(long)]
        vocab_from: Option<PathBuf>,
        #[arg(long, default_value_t = 1, requires = "vocab_from")]
        min_char_frequency: usize,
        #[arg(long, default_value_t = 0.2, requires = "vocab_from")]
        max_unk_ratio: f64,
    },
    /// Train on labeled data, from scratch unless `--init` is given.
    Train {
        #[command(flatten)]
        args: TrainArgs,
        /// Checkpoint to start from.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Train on a synthetic corpus.
    Pretrain {
        #[command(flatten)]
        args: TrainArgs,
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Continue training a pre-trained checkpoint on labeled data.
    Finetune {
        #[command(flatten)]
        args: TrainArgs,
        #[arg(long)]
        init: PathBuf,
    },
    /// Report full-sequence accuracy on a dataset.
    Eval(EvalArgs),
    /// Segment lines from stdin.
    Segment {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        beam: Option<usize>,
    },
    /// Corpus statistics of a dataset.
    Stats {
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CasingArg {
    Camel,
    Lowercase,
    Unlabeled,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    dev: PathBuf,
    /// Where the best checkpoint is written.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch metrics log; defaults to `<out>.metrics.log`.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Casing of the data and dev files. Defaults to camel with
    /// `--mixed-case`, lowercase otherwise.
    #[arg(long, value_enum)]
    casing: Option<CasingArg>,
    /// Extra text files whose characters join the vocabulary.
    #[arg(long, num_args = 1..)]
    vocab_from: Vec<PathBuf>,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Maximum number of epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Epochs without dev improvement before stopping.
    #[arg(long)]
    patience: Option<usize>,
    /// Examples sampled per epoch.
    #[arg(long)]
    epoch_size: Option<usize>,
    #[arg(long)]
    clip_norm: Option<f64>,
    /// Beam width for dev evaluation.
    #[arg(long)]
    eval_beam: Option<usize>,
    /// Train and select on camel-case examples plus their lowercase twins.
    #[arg(long)]
    mixed_case: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Character embedding width [default: 256]
    #[arg(long)]
    embedding_size: Option<usize>,
    /// Tag embedding width [default: 64]
    #[arg(long)]
    tag_embedding_size: Option<usize>,
    /// Forward encoder layers [default: 2]
    #[arg(long)]
    forward_layers: Option<usize>,
    /// Backward encoder layers [default: 2]
    #[arg(long)]
    backward_layers: Option<usize>,
    /// Decoder layers [default: 1]
    #[arg(long)]
    decoder_layers: Option<usize>,
    /// Decoder units [default: 64]
    #[arg(long)]
    decoder_units: Option<usize>,
    /// Units per encoder layer [default: 256]
    #[arg(long)]
    encoder_units: Option<usize>,
    /// Beam width stored with the model [default: 2]
    #[arg(long)]
    beam_size: Option<usize>,
    /// Characters seen fewer times map to the unknown symbol [default: 1]
    #[arg(long)]
    min_char_frequency: Option<usize>,
}

impl ModelArgs {
    fn is_set(&self) -> bool {
        [
            self.embedding_size,
            self.tag_embedding_size,
            self.forward_layers,
            self.backward_layers,
            self.decoder_layers,
            self.decoder_units,
            self.encoder_units,
            self.beam_size,
            self.min_char_frequency,
        ]
        .iter()
        .any(Option::is_some)
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint to evaluate; optional with `--rule-baseline`.
    #[arg(long, required_unless_present = "rule_baseline")]
    model: Option<PathBuf>,
    #[arg(long)]
    data: PathBuf,
    /// Casing of the data file. Camel data is scored together with its
    /// lowercase twins.
    #[arg(long, value_enum, default_value_t = CasingArg::Unlabeled)]
    casing: CasingArg,
    /// Also score the case-switch rule.
    #[arg(long)]
    rule_baseline: bool,
    /// Accuracy tables by input length and segment count.
    #[arg(long)]
    by_length: bool,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    beam: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
