use crate::data::example::{Casing, Origin, SegExample};
use crate::data::vocab::CharVocab;
use crate::segmentation::Segmentation;

fn is_upper_consonant(c: char) -> bool {
    c.is_ascii_uppercase() && !matches!(c, 'A' | 'E' | 'I' | 'O' | 'U')
}

/// Turns a space-separated entity name into a pre-training example. Tokens
/// made only of uppercase consonants (`CD`, `TV`) are spelled out letter by
/// letter. Returns `None` when the name has no usable token.
pub fn synthesize_pretrain_example(entity_name: &str) -> Option<SegExample> {
    let mut segments: Vec<String> = Vec::new();
    for token in entity_name.split_whitespace() {
        let token: String = token.chars().filter(|c| !c.is_control()).collect();
        if token.is_empty() {
            return None;
        }
        if token.chars().all(is_upper_consonant) {
            segments.extend(token.chars().map(String::from));
        } else {
            segments.push(token);
        }
    }
    Segmentation::new(segments)
        .ok()
        .map(|s| SegExample::new(s, Casing::Camel, Origin::Synthetic))
}

/// Drops examples whose share of out-of-vocabulary characters exceeds
/// `max_unk_ratio`.
pub fn filter_by_vocab(examples: Vec<SegExample>, vocab: &CharVocab, max_unk_ratio: f64) -> Vec<SegExample> {
    examples
        .into_iter()
        .filter(|ex| {
            let raw = ex.raw();
            let total = raw.chars().count();
            let unk = raw.chars().filter(|c| !vocab.contains(*c)).count();
            total > 0 && unk as f64 <= max_unk_ratio * total as f64
        })
        .collect()
}
