//! Dataset construction: camel-case auto-segmentation, lowercase and mixed
//! variants, synthetic pre-training examples, vocabularies and statistics.

mod example;
mod io;
mod stats;
mod synth;
mod vocab;

pub use example::{auto_segment_camel, lowercase_variant, make_mixed_dataset, Casing, Origin, SegExample};
pub use io::{
    format_dataset, load_common_crawl, load_dataset, load_entity_names, parse_dataset, save_dataset,
    write_atomic,
};
pub use stats::{compute_stats, CorpusStats};
pub use synth::{filter_by_vocab, synthesize_pretrain_example};
pub use vocab::{CharVocab, PAD_ID, UNK_ID};
