use serde::{Deserialize, Serialize};

use crate::data::example::SegExample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Mean characters per raw input.
    pub average_input_length: f64,
    /// Mean segments per example.
    pub average_segment_count: f64,
    pub total_examples: usize,
}

pub fn compute_stats(dataset: &[SegExample]) -> Result<CorpusStats> {
    if dataset.is_empty() {
        return Err(Error::contract("statistics of an empty dataset"));
    }
    let chars: usize = dataset.iter().map(SegExample::char_len).sum();
    let segs: usize = dataset.iter().map(|e| e.segments.len()).sum();
    let n = dataset.len() as f64;
    Ok(CorpusStats {
        average_input_length: chars as f64 / n,
        average_segment_count: segs as f64 / n,
        total_examples: dataset.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Casing, Origin};
    use crate::segmentation::Segmentation;

    fn ex(s: &str) -> SegExample {
        SegExample::new(Segmentation::parse(s).unwrap(), Casing::Camel, Origin::Crawl)
    }

    #[test]
    fn hand_counted() {
        let s = compute_stats(&[ex("a b")]).unwrap();
        assert_eq!(s, CorpusStats { average_input_length: 2.0, average_segment_count: 2.0, total_examples: 1 });
    }

    #[test]
    fn duplication_keeps_means() {
        let d = vec![ex("open research"), ex("photo of the day"), ex("N Y Times . com")];
        let a = compute_stats(&d).unwrap();
        let doubled: Vec<_> = d.iter().chain(&d).cloned().collect();
        let b = compute_stats(&doubled).unwrap();
        assert_eq!(a.average_input_length, b.average_input_length);
        assert_eq!(a.average_segment_count, b.average_segment_count);
        assert_eq!(b.total_examples, 6);
    }

    #[test]
    fn empty_is_error() {
        assert!(compute_stats(&[]).is_err());
    }
}
