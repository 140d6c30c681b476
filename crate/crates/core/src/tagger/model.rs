use crate::error::{Error, Result};
use crate::nn::{GruIds, GruWeights, Initializer, ParamId, ParamStore, Tensor};
use crate::scalar::Scalar;
use crate::tagger::config::{TaggerConfig, OUTPUT_CLASSES, TAG_VOCAB};

/// Handles into the model's [`ParamStore`], grouped by role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelIds {
    pub char_embeddings: ParamId,
    pub tag_embeddings: ParamId,
    pub fwd_encoder: Vec<GruIds>,
    pub bwd_encoder: Vec<GruIds>,
    pub decoder: Vec<GruIds>,
    pub output_weight: ParamId,
    pub output_bias: ParamId,
}

/// All learned parameters of the encoder-decoder tagger.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel<T> {
    config: TaggerConfig,
    params: ParamStore<T>,
    ids: ModelIds,
}

impl<T: Scalar> TaggerModel<T> {
    /// All-zero parameters.
    pub fn zeros(config: TaggerConfig) -> Result<Self> {
        config.validate()?;
        let c = &config;
        let mut params = ParamStore::new();
        let char_embeddings = params.add(
            "char_embeddings",
            Tensor::zeros(&[c.char_vocab_size, c.input_embedding_size]),
        )?;
        let tag_embeddings = params.add(
            "tag_embeddings",
            Tensor::zeros(&[TAG_VOCAB, c.output_embedding_size]),
        )?;
        let h = c.encoder_units_per_layer;
        let mut stack = |dir: &str, layers: usize| -> Result<Vec<GruIds>> {
            (0..layers)
                .map(|l| {
                    let input = if l == 0 { c.input_embedding_size } else { h };
                    GruIds::register(&mut params, &format!("encoder.{dir}.{l}"), input, h)
                })
                .collect()
        };
        let fwd_encoder = stack("fwd", c.encoder_layers_forward)?;
        let bwd_encoder = stack("bwd", c.encoder_layers_backward)?;
        let decoder = (0..c.decoder_layers)
            .map(|l| {
                let input = if l == 0 { c.decoder_input_size() } else { c.decoder_units };
                GruIds::register(&mut params, &format!("decoder.{l}"), input, c.decoder_units)
            })
            .collect::<Result<Vec<_>>>()?;
        let output_weight = params.add("output.weight", Tensor::zeros(&[OUTPUT_CLASSES, c.decoder_units]))?;
        let output_bias = params.add("output.bias", Tensor::zeros(&[OUTPUT_CLASSES]))?;
        let ids = ModelIds {
            char_embeddings,
            tag_embeddings,
            fwd_encoder,
            bwd_encoder,
            decoder,
            output_weight,
            output_bias,
        };
        Ok(TaggerModel { config, params, ids })
    }

    /// Glorot-uniform matrices, zero biases, N(0, 0.1) embeddings.
    pub fn new(config: TaggerConfig, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let mut init = Initializer::new(seed);
        let ids = model.ids.clone();
        init.normal(model.params.get_mut(ids.char_embeddings), 0.1);
        init.normal(model.params.get_mut(ids.tag_embeddings), 0.1);
        for cell in ids.fwd_encoder.iter().chain(&ids.bwd_encoder).chain(&ids.decoder) {
            for m in cell.matrices() {
                init.glorot(model.params.get_mut(m));
            }
        }
        init.glorot(model.params.get_mut(ids.output_weight));
        Ok(model)
    }

    /// Builds a model from named tensors; every expected name must be present
    /// with the expected shape, and no extra names are allowed.
    pub fn from_named(config: TaggerConfig, tensors: Vec<(String, Tensor<T>)>) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        if tensors.len() != model.params.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                model.params.len(),
                tensors.len()
            )));
        }
        for (name, t) in tensors {
            let id = model
                .params
                .id(&name)
                .ok_or_else(|| Error::Checkpoint(format!("unexpected tensor {name}")))?;
            let slot = model.params.get_mut(id);
            if slot.shape() != t.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor {name}: expected shape {:?}, found {:?}",
                    slot.shape(),
                    t.shape()
                )));
            }
            *slot = t;
        }
        Ok(model)
    }

    pub fn config(&self) -> &TaggerConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.params
    }

    pub fn ids(&self) -> &ModelIds {
        &self.ids
    }

    pub(crate) fn gru(&self, ids: &GruIds) -> GruWeights<'_, T> {
        ids.weights(&self.params)
    }

    /// Same architecture with parameters converted to another scalar type.
    pub fn cast<U: Scalar>(&self) -> TaggerModel<U> {
        TaggerModel {
            config: self.config.clone(),
            params: self.params.cast(),
            ids: self.ids.clone(),
        }
    }
}
