//! `--config` file: TOML defaults for the training and model flags. Flags
//! given on the command line win over the file, the file over built-in
//! defaults.
//!
//! ```toml
//! seed = 7
//!
//! [train]
//! learning_rate = 0.001
//! batch_size = 32
//!
//! [model]
//! decoder_units = 64
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use wordbreak::train::{Phase, TrainConfig};
use wordbreak::TaggerConfig;

use crate::{HyperArgs, ModelArgs};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub model: ModelSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub epoch_size: Option<usize>,
    pub clip_norm: Option<f64>,
    pub eval_beam: Option<usize>,
    pub mixed_case: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub input_embedding_size: Option<usize>,
    pub output_embedding_size: Option<usize>,
    pub encoder_layers_forward: Option<usize>,
    pub encoder_layers_backward: Option<usize>,
    pub decoder_layers: Option<usize>,
    pub decoder_units: Option<usize>,
    pub encoder_units_per_layer: Option<usize>,
    pub beam_size: Option<usize>,
    pub min_char_frequency: Option<usize>,
}

impl ModelSection {
    fn is_empty(&self) -> bool {
        [
            self.input_embedding_size,
            self.output_embedding_size,
            self.encoder_layers_forward,
            self.encoder_layers_backward,
            self.decoder_layers,
            self.decoder_units,
            self.encoder_units_per_layer,
            self.beam_size,
            self.min_char_frequency,
        ]
        .iter()
        .all(Option::is_none)
    }
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn seed(flag: Option<u64>, file: &FileConfig) -> u64 {
    flag.or(file.seed).unwrap_or(0)
}

pub fn train_config(phase: Phase, flags: &HyperArgs, file: &FileConfig, seed: u64) -> Result<TrainConfig> {
    let f = &file.train;
    let base = TrainConfig::new(phase);
    let cfg = TrainConfig {
        phase,
        learning_rate: flags.learning_rate.or(f.learning_rate).unwrap_or(base.learning_rate),
        batch_size: flags.batch_size.or(f.batch_size).unwrap_or(base.batch_size),
        max_epochs: flags.epochs.or(f.max_epochs).unwrap_or(base.max_epochs),
        patience: flags.patience.or(f.patience).unwrap_or(base.patience),
        seed,
        mixed_case: flags.mixed_case || f.mixed_case.unwrap_or(false),
        epoch_size: flags.epoch_size.or(f.epoch_size).or(base.epoch_size),
        clip_norm: flags.clip_norm.or(f.clip_norm).unwrap_or(base.clip_norm),
        eval_beam: flags.eval_beam.or(f.eval_beam),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Model sizes and the vocabulary frequency cutoff.
pub fn model_config(flags: &ModelArgs, file: &FileConfig) -> Result<(TaggerConfig, usize)> {
    let f = &file.model;
    let d = TaggerConfig::default();
    let cfg = TaggerConfig {
        input_embedding_size: flags.embedding_size.or(f.input_embedding_size).unwrap_or(d.input_embedding_size),
        output_embedding_size: flags
            .tag_embedding_size
            .or(f.output_embedding_size)
            .unwrap_or(d.output_embedding_size),
        encoder_layers_forward: flags
            .forward_layers
            .or(f.encoder_layers_forward)
            .unwrap_or(d.encoder_layers_forward),
        encoder_layers_backward: flags
            .backward_layers
            .or(f.encoder_layers_backward)
            .unwrap_or(d.encoder_layers_backward),
        decoder_layers: flags.decoder_layers.or(f.decoder_layers).unwrap_or(d.decoder_layers),
        decoder_units: flags.decoder_units.or(f.decoder_units).unwrap_or(d.decoder_units),
        encoder_units_per_layer: flags
            .encoder_units
            .or(f.encoder_units_per_layer)
            .unwrap_or(d.encoder_units_per_layer),
        beam_size: flags.beam_size.or(f.beam_size).unwrap_or(d.beam_size),
        ..d
    };
    let min_freq = flags.min_char_frequency.or(f.min_char_frequency).unwrap_or(1);
    if min_freq == 0 {
        bail!("--min-char-frequency must be at least 1");
    }
    Ok((cfg, min_freq))
}

/// A checkpoint fixes the architecture, so size settings alongside `--init`
/// are rejected.
pub fn reject_model_settings(flags: &ModelArgs, file: &FileConfig) -> Result<()> {
    if flags.is_set() || !file.model.is_empty() {
        bail!("model size settings cannot be combined with --init; the checkpoint fixes the architecture");
    }
    Ok(())
}
