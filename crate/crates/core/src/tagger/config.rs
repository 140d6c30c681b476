use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tag embedding rows: B, I and the start-of-sequence pseudo-tag.
pub const TAG_VOCAB: usize = 3;
pub const SOS_INDEX: usize = 2;
/// Output classes: B and I.
pub const OUTPUT_CLASSES: usize = 2;

/// Network sizes. [`Default`] gives the full-size model (256-wide character
/// embeddings and encoders, 64-wide tag embeddings and decoder, beam 2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaggerConfig {
    pub input_embedding_size: usize,
    pub output_embedding_size: usize,
    pub encoder_layers_forward: usize,
    pub encoder_layers_backward: usize,
    pub decoder_layers: usize,
    pub decoder_units: usize,
    pub encoder_units_per_layer: usize,
    pub beam_size: usize,
    pub char_vocab_size: usize,
    pub tag_count: usize,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            input_embedding_size: 256,
            output_embedding_size: 64,
            encoder_layers_forward: 2,
            encoder_layers_backward: 2,
            decoder_layers: 1,
            decoder_units: 64,
            encoder_units_per_layer: 256,
            beam_size: 2,
            char_vocab_size: 0,
            tag_count: TAG_VOCAB,
        }
    }
}

impl TaggerConfig {
    pub fn with_vocab(char_vocab_size: usize) -> Self {
        TaggerConfig {
            char_vocab_size,
            ..Self::default()
        }
    }

    /// Width of the decoder input: forward state, backward state, character
    /// embedding and previous-tag embedding.
    pub fn decoder_input_size(&self) -> usize {
        2 * self.encoder_units_per_layer + self.input_embedding_size + self.output_embedding_size
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("input_embedding_size", self.input_embedding_size),
            ("output_embedding_size", self.output_embedding_size),
            ("encoder_layers_forward", self.encoder_layers_forward),
            ("encoder_layers_backward", self.encoder_layers_backward),
            ("decoder_layers", self.decoder_layers),
            ("decoder_units", self.decoder_units),
            ("encoder_units_per_layer", self.encoder_units_per_layer),
            ("beam_size", self.beam_size),
            ("char_vocab_size", self.char_vocab_size),
        ];
        for (name, v) in sizes {
            if v == 0 {
                return Err(Error::contract(format!("{name} must be positive")));
            }
        }
        if self.tag_count != TAG_VOCAB {
            return Err(Error::contract(format!(
                "tag_count must be {TAG_VOCAB} (B, I, start), got {}",
                self.tag_count
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_sizes() {
        let c = TaggerConfig::default();
        assert_eq!(c.input_embedding_size, 256);
        assert_eq!(c.output_embedding_size, 64);
        assert_eq!(c.encoder_layers_forward, 2);
        assert_eq!(c.encoder_layers_backward, 2);
        assert_eq!(c.decoder_layers, 1);
        assert_eq!(c.decoder_units, 64);
        assert_eq!(c.encoder_units_per_layer, 256);
        assert_eq!(c.beam_size, 2);
        assert_eq!(c.tag_count, 3);
        assert_eq!(c.decoder_input_size(), 256 + 256 + 256 + 64);
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(TaggerConfig::default().validate().is_err());
        assert!(TaggerConfig::with_vocab(10).validate().is_ok());
        let c = TaggerConfig {
            decoder_units: 0,
            ..TaggerConfig::with_vocab(10)
        };
        assert!(c.validate().is_err());
    }
}
