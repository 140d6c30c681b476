use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{lowercase_variant, Casing, CharVocab, SegExample};
use crate::error::{Error, Result};
use crate::nn::{adam_step, AdamState, Gradients};
use crate::scalar::Scalar;
use crate::segmentation::{segments_to_tags, TagSequence};
use crate::tagger::{nll_and_gradients, TaggerModel};
use crate::train::checkpoint::parameter_digest;
use crate::train::config::{Phase, TrainConfig};
use crate::train::eval::{evaluate, LengthBuckets, NeuralSegmenter};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub phase: Phase,
    /// Mean per-example negative log-likelihood over the epoch.
    pub train_loss: f64,
    pub dev_accuracy: f64,
    pub dev_lc_acc: Option<f64>,
    pub dev_cc_acc: Option<f64>,
}

impl EpochMetrics {
    /// `key=value` record for the metrics log.
    pub fn log_line(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
        format!(
            "epoch={} phase={} train_loss={:.6} dev_acc={:.6} dev_lc_acc={} dev_cc_acc={}",
            self.epoch,
            self.phase,
            self.train_loss,
            self.dev_accuracy,
            opt(self.dev_lc_acc),
            opt(self.dev_cc_acc)
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    /// Parameters from the epoch with the best dev accuracy.
    pub model: TaggerModel<T>,
    pub history: Vec<EpochMetrics>,
    pub best_epoch: usize,
    pub best_dev_accuracy: f64,
    /// Optimizer state at the end of the last epoch.
    pub optimizer: AdamState<T>,
}

fn with_lowercase_twins(examples: &[SegExample]) -> Vec<SegExample> {
    examples
        .iter()
        .flat_map(|ex| {
            let twin = (ex.casing == Casing::Camel).then(|| lowercase_variant(ex));
            std::iter::once(ex.clone()).chain(twin)
        })
        .collect()
}

fn encode_examples(vocab: &CharVocab, examples: &[SegExample]) -> Result<Vec<(Vec<usize>, TagSequence)>> {
    examples
        .iter()
        .map(|ex| Ok((vocab.encode(&ex.raw()), segments_to_tags(&ex.segments)?)))
        .collect()
}

/// Trains `model` on `train`, selecting the epoch with the best dev
/// accuracy. `on_epoch` sees each epoch's metrics as soon as they exist.
pub fn train_phase_with<T: Scalar>(
    model: TaggerModel<T>,
    vocab: &CharVocab,
    train: &[SegExample],
    dev: &[SegExample],
    config: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochMetrics),
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    if train.is_empty() || dev.is_empty() {
        return Err(Error::contract("training and dev sets must be nonempty"));
    }
    if model.config().char_vocab_size != vocab.len() {
        return Err(Error::contract(format!(
            "model expects {} characters but the vocabulary has {}",
            model.config().char_vocab_size,
            vocab.len()
        )));
    }
    let (train, dev) = if config.mixed_case {
        (with_lowercase_twins(train), with_lowercase_twins(dev))
    } else {
        (train.to_vec(), dev.to_vec())
    };
    let encoded = encode_examples(vocab, &train)?;
    let eval_beam = config.eval_beam.unwrap_or(model.config().beam_size);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = model;
    let mut adam = AdamState::new(model.params(), T::of(config.learning_rate));
    let clip = T::of(config.clip_norm);
    let mut history = Vec::new();
    let mut best: Option<(usize, f64, TaggerModel<T>)> = None;
    let mut since_best = 0usize;
    let mut order: Vec<usize> = (0..encoded.len()).collect();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let take = config.epoch_size.map_or(order.len(), |n| n.min(order.len()));
        let mut loss_sum = 0.0;
        for (b, batch) in order[..take].chunks(config.batch_size).enumerate() {
            let mut grads = Gradients::zeros_like(model.params());
            for &i in batch {
                let (ids, tags) = &encoded[i];
                let (nll, g) = nll_and_gradients(&model, ids, tags)?;
                if !nll.is_finite() {
                    return Err(Error::NonFinite(format!("loss at epoch {epoch}, batch {b}")));
                }
                loss_sum += nll.as_f64();
                grads.add_assign(&g)?;
            }
            grads.scale(T::one() / T::of(batch.len() as f64));
            grads.clip_global_norm(clip);
            adam_step(model.params_mut(), &grads, &mut adam)?;
            if !model.params().all_finite() {
                return Err(Error::NonFinite(format!(
                    "parameters after epoch {epoch}, batch {b}"
                )));
            }
        }

        let report = evaluate(
            &NeuralSegmenter {
                model: &model,
                vocab,
                beam_size: eval_beam,
            },
            &dev,
            LengthBuckets::default(),
        )?;
        let metrics = EpochMetrics {
            epoch,
            phase: config.phase,
            train_loss: loss_sum / take as f64,
            dev_accuracy: report.sequence_accuracy,
            dev_lc_acc: report.casing_accuracy(Casing::Lowercase),
            dev_cc_acc: report.casing_accuracy(Casing::Camel),
        };
        on_epoch(&metrics);
        history.push(metrics);

        let improved = best.as_ref().is_none_or(|(_, acc, _)| report.sequence_accuracy > *acc);
        if improved {
            best = Some((epoch, report.sequence_accuracy, model.clone()));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= config.patience {
            break;
        }
    }

    let (best_epoch, best_dev_accuracy, best_model) = best.expect("at least one epoch runs");
    Ok(TrainOutcome {
        model: best_model,
        history,
        best_epoch,
        best_dev_accuracy,
        optimizer: adam,
    })
}

pub fn train_phase<T: Scalar>(
    model: TaggerModel<T>,
    vocab: &CharVocab,
    train: &[SegExample],
    dev: &[SegExample],
    config: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    train_phase_with(model, vocab, train, dev, config, &mut |_| {})
}

#[derive(Debug, Clone)]
pub struct TransferOutcome<T> {
    pub pretrain: TrainOutcome<T>,
    pub finetune: TrainOutcome<T>,
    /// Parameter digest of the selected pre-trained model.
    pub pretrain_digest: String,
    /// Parameter digest of the model handed to fine-tuning, before its first step.
    pub finetune_start_digest: String,
}

/// Pre-trains the whole model on `synthetic`, then continues from the best
/// pre-trained parameters on `train` with a fresh optimizer.
#[allow(clippy::too_many_arguments)]
pub fn pretrain_then_finetune<T: Scalar>(
    model: TaggerModel<T>,
    vocab: &CharVocab,
    synthetic: &[SegExample],
    train: &[SegExample],
    dev: &[SegExample],
    pretrain_config: &TrainConfig,
    finetune_config: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochMetrics),
) -> Result<TransferOutcome<T>> {
    if model.config().char_vocab_size != vocab.len() {
        return Err(Error::contract(
            "pre-training and fine-tuning must share the model's vocabulary",
        ));
    }
    let pretrain = train_phase_with(model, vocab, synthetic, dev, pretrain_config, on_epoch)?;
    let pretrain_digest = parameter_digest(pretrain.model.params());
    let start = pretrain.model.clone();
    let finetune_start_digest = parameter_digest(start.params());
    let finetune = train_phase_with(start, vocab, train, dev, finetune_config, on_epoch)?;
    Ok(TransferOutcome {
        pretrain,
        finetune,
        pretrain_digest,
        finetune_start_digest,
    })
}
