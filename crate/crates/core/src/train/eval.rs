use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{Casing, CharVocab, SegExample};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::segmentation::{case_split_rule, Segmentation};
use crate::tagger::{segment, TaggerModel};

/// Anything that turns a raw string into a segmentation.
pub trait Segmenter {
    fn segment(&self, raw: &str) -> Result<Segmentation>;
}

/// The case-switch rule as a segmenter.
#[derive(Debug, Clone, Copy, Default)]
pub struct CaseRule;

impl Segmenter for CaseRule {
    fn segment(&self, raw: &str) -> Result<Segmentation> {
        case_split_rule(raw)
    }
}

/// A trained tagger with its vocabulary and decoding beam.
pub struct NeuralSegmenter<'a, T> {
    pub model: &'a TaggerModel<T>,
    pub vocab: &'a CharVocab,
    pub beam_size: usize,
}

impl<'a, T: Scalar> NeuralSegmenter<'a, T> {
    /// Uses the beam size from the model's configuration.
    pub fn new(model: &'a TaggerModel<T>, vocab: &'a CharVocab) -> Self {
        NeuralSegmenter {
            model,
            vocab,
            beam_size: model.config().beam_size,
        }
    }
}

impl<T: Scalar> Segmenter for NeuralSegmenter<'_, T> {
    fn segment(&self, raw: &str) -> Result<Segmentation> {
        segment(self.model, self.vocab, raw, self.beam_size)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Count {
    pub correct: usize,
    pub total: usize,
}

impl Count {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            f64::NAN
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += usize::from(ok);
    }
}

/// Clamping ranges for length buckets; values outside `[min, max]` fall
/// into the end buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBuckets {
    pub min_chars: usize,
    pub max_chars: usize,
    pub min_segments: usize,
    pub max_segments: usize,
}

impl Default for LengthBuckets {
    fn default() -> Self {
        LengthBuckets {
            min_chars: 5,
            max_chars: 25,
            min_segments: 1,
            max_segments: 6,
        }
    }
}

impl LengthBuckets {
    pub fn chars(&self, n: usize) -> usize {
        n.clamp(self.min_chars, self.max_chars)
    }

    pub fn segments(&self, n: usize) -> usize {
        n.clamp(self.min_segments, self.max_segments)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub input: String,
    pub reference: String,
    pub prediction: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub overall: Count,
    pub sequence_accuracy: f64,
    pub by_casing: BTreeMap<Casing, Count>,
    /// Keyed by bucketed input length in characters.
    pub by_input_length: BTreeMap<usize, Count>,
    /// Keyed by bucketed reference segment count.
    pub by_segment_count: BTreeMap<usize, Count>,
    /// Keyed by (input-length bucket, segment-count bucket).
    pub per_length: BTreeMap<(usize, usize), Count>,
    pub buckets: LengthBuckets,
    pub errors: Vec<Mismatch>,
}

impl EvalReport {
    pub fn casing_accuracy(&self, casing: Casing) -> Option<f64> {
        self.by_casing.get(&casing).map(Count::ratio)
    }
}

/// Full-sequence accuracy of `predictor` over `dataset`, overall and broken
/// down by casing and length.
pub fn evaluate(predictor: &dyn Segmenter, dataset: &[SegExample], buckets: LengthBuckets) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(Error::contract("evaluation over an empty dataset"));
    }
    let mut report = EvalReport {
        overall: Count::default(),
        sequence_accuracy: 0.0,
        by_casing: BTreeMap::new(),
        by_input_length: BTreeMap::new(),
        by_segment_count: BTreeMap::new(),
        per_length: BTreeMap::new(),
        buckets,
        errors: Vec::new(),
    };
    for ex in dataset {
        let raw = ex.raw();
        let pred = predictor.segment(&raw)?;
        if pred.raw() != raw {
            return Err(Error::contract(format!(
                "prediction {pred} does not spell input {raw:?}"
            )));
        }
        let ok = pred == ex.segments;
        let lb = buckets.chars(ex.char_len());
        let sb = buckets.segments(ex.segments.len());
        report.overall.add(ok);
        report.by_casing.entry(ex.casing).or_default().add(ok);
        report.by_input_length.entry(lb).or_default().add(ok);
        report.by_segment_count.entry(sb).or_default().add(ok);
        report.per_length.entry((lb, sb)).or_default().add(ok);
        if !ok {
            report.errors.push(Mismatch {
                input: raw,
                reference: ex.segments.to_string(),
                prediction: pred.to_string(),
            });
        }
    }
    report.sequence_accuracy = report.overall.ratio();
    Ok(report)
}
