//! Training phases, pre-train then fine-tune transfer, evaluation and
//! checkpoints.

mod checkpoint;
mod config;
mod eval;
mod trainer;

pub use checkpoint::{
    load_checkpoint, parameter_digest, save_checkpoint, Checkpoint, TrainingMetadata, FORMAT_VERSION,
};
pub use config::{Phase, TrainConfig};
pub use eval::{evaluate, CaseRule, Count, EvalReport, LengthBuckets, Mismatch, NeuralSegmenter, Segmenter};
pub use trainer::{
    pretrain_then_finetune, train_phase, train_phase_with, EpochMetrics, TrainOutcome, TransferOutcome,
};
