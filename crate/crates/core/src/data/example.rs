use serde::{Deserialize, Serialize};

use crate::segmentation::{case_split_rule, Segmentation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Casing {
    Camel,
    Lowercase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Crawl,
    Synthetic,
}

/// A gold segmentation with its casing variant and provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegExample {
    pub segments: Segmentation,
    pub casing: Casing,
    pub origin: Origin,
}

impl SegExample {
    pub fn new(segments: Segmentation, casing: Casing, origin: Origin) -> Self {
        SegExample {
            segments,
            casing,
            origin,
        }
    }

    pub fn raw(&self) -> String {
        self.segments.raw()
    }

    pub fn char_len(&self) -> usize {
        self.segments.char_len()
    }
}

/// Case-rule segmentation of a camel-case domain name.
pub fn auto_segment_camel(domain: &str) -> crate::Result<SegExample> {
    Ok(SegExample::new(
        case_split_rule(domain)?,
        Casing::Camel,
        Origin::Crawl,
    ))
}

/// Lowercases every segment, keeping the boundaries.
pub fn lowercase_variant(ex: &SegExample) -> SegExample {
    let segments = ex
        .segments
        .map_segments(str::to_lowercase)
        .expect("lowercasing never empties a segment");
    SegExample::new(segments, Casing::Lowercase, ex.origin)
}

/// Each example followed by its lowercase twin.
pub fn make_mixed_dataset(camel_examples: &[SegExample]) -> Vec<SegExample> {
    camel_examples
        .iter()
        .flat_map(|ex| [ex.clone(), lowercase_variant(ex)])
        .collect()
}
