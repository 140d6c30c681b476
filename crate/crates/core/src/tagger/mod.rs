//! Character tagger: stacked forward and backward GRU encoders, an
//! autoregressive GRU decoder that reads the encoder states and input
//! embedding at its own position plus the previous tag, and a two-way softmax.

mod config;
mod inference;
mod likelihood;
mod model;

pub use config::{TaggerConfig, OUTPUT_CLASSES, SOS_INDEX, TAG_VOCAB};
pub use inference::{
    beam_search, decode_step, decode_step_log, encode, greedy_decode, segment, Decoded, DecoderState,
    EncoderStates,
};
pub use likelihood::{nll_and_gradients, record_log_likelihood, sequence_log_likelihood};
pub use model::{ModelIds, TaggerModel};
