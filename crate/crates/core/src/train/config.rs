use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Baseline,
    Pretrain,
    Finetune,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Baseline => "baseline",
            Phase::Pretrain => "pretrain",
            Phase::Finetune => "finetune",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub phase: Phase,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a dev improvement tolerated before stopping.
    pub patience: usize,
    pub seed: u64,
    /// Add a lowercase twin of every camel-case train and dev example.
    pub mixed_case: bool,
    /// Examples sampled per epoch; `None` walks the whole training set.
    pub epoch_size: Option<usize>,
    pub clip_norm: f64,
    /// Beam used for dev evaluation; `None` uses the model's configured beam.
    pub eval_beam: Option<usize>,
}

impl TrainConfig {
    pub fn new(phase: Phase) -> Self {
        TrainConfig {
            phase,
            learning_rate: match phase {
                Phase::Finetune => 1e-4,
                Phase::Baseline | Phase::Pretrain => 1e-3,
            },
            batch_size: 32,
            max_epochs: 30,
            patience: 5,
            seed: 0,
            mixed_case: false,
            epoch_size: match phase {
                Phase::Pretrain => Some(500_000),
                Phase::Baseline | Phase::Finetune => None,
            },
            clip_norm: 5.0,
            eval_beam: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::contract("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::contract("batch size must be positive"));
        }
        if self.max_epochs == 0 {
            return Err(Error::contract("max_epochs must be positive"));
        }
        if self.epoch_size == Some(0) {
            return Err(Error::contract("epoch size must be positive"));
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return Err(Error::contract("clip norm must be positive"));
        }
        if self.eval_beam == Some(0) {
            return Err(Error::contract("evaluation beam must be positive"));
        }
        Ok(())
    }
}
