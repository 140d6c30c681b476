//! Checkpoint container:
//!
//! ```text
//! magic "WBRKCKPT" | format_version u32 LE | header_len u64 LE | header (JSON)
//! | tensor payloads, f32 LE, in header order | SHA-256 of all preceding bytes
//! ```
//!
//! The header lists the tagger configuration, the character vocabulary, every
//! parameter tensor's name and shape, optional Adam hyperparameters (whose
//! first and second moments follow the parameters in the payload), and
//! training metadata.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{write_atomic, CharVocab};
use crate::error::{Error, Result};
use crate::nn::{AdamState, ParamStore, Tensor};
use crate::scalar::Scalar;
use crate::tagger::{TaggerConfig, TaggerModel};
use crate::train::config::Phase;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"WBRKCKPT";
const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub phase: Option<Phase>,
    pub epoch: usize,
    pub dev_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub vocab: CharVocab,
    pub model: TaggerModel<f32>,
    pub optimizer: Option<AdamState<f32>>,
    pub metadata: TrainingMetadata,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct OptimizerHeader {
    step: u64,
    beta1: f32,
    beta2: f32,
    epsilon: f32,
    learning_rate: f32,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    config: TaggerConfig,
    vocab: CharVocab,
    tensors: Vec<TensorEntry>,
    optimizer: Option<OptimizerHeader>,
    metadata: TrainingMetadata,
}

impl Checkpoint {
    pub fn new(model: TaggerModel<f32>, vocab: CharVocab) -> Self {
        Checkpoint {
            vocab,
            model,
            optimizer: None,
            metadata: TrainingMetadata::default(),
        }
    }

    pub fn config(&self) -> &TaggerConfig {
        self.model.config()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        check_vocab(self.model.config(), &self.vocab)?;
        let params = self.model.params();
        let header = Header {
            format_version: FORMAT_VERSION,
            config: self.model.config().clone(),
            vocab: self.vocab.clone(),
            tensors: params
                .iter()
                .map(|(_, name, t)| TensorEntry {
                    name: name.to_string(),
                    shape: t.shape().to_vec(),
                })
                .collect(),
            optimizer: self.optimizer.as_ref().map(|a| OptimizerHeader {
                step: a.step,
                beta1: a.beta1,
                beta2: a.beta2,
                epsilon: a.epsilon,
                learning_rate: a.learning_rate,
            }),
            metadata: self.metadata.clone(),
        };
        let header_json = serde_json::to_vec(&header)?;

        let mut out = Vec::with_capacity(header_json.len() + 4 * params.num_scalars() + 64);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
        out.extend_from_slice(&header_json);
        let mut write = |t: &Tensor<f32>| {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        };
        params.iter().for_each(|(_, _, t)| write(t));
        if let Some(adam) = &self.optimizer {
            if adam.m.len() != params.len() || adam.v.len() != params.len() {
                return Err(Error::Checkpoint("optimizer state does not match parameters".into()));
            }
            adam.m.iter().chain(&adam.v).for_each(&mut write);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fail = |m: &str| Error::Checkpoint(m.to_string());
        if bytes.len() < MAGIC.len() + 12 + DIGEST_LEN {
            return Err(fail("file too short"));
        }
        if &bytes[..MAGIC.len()] != MAGIC {
            return Err(fail("not a checkpoint file"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(fail("checksum mismatch (file corrupt or truncated)"));
        }
        let mut cursor = Reader { bytes: body, pos: MAGIC.len() };
        let version = u32::from_le_bytes(cursor.take(4)?.try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "format version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let header_len = u64::from_le_bytes(cursor.take(8)?.try_into().expect("8 bytes"));
        let header_len = usize::try_from(header_len).map_err(|_| fail("header length overflow"))?;
        let header: Header = serde_json::from_slice(cursor.take(header_len)?)
            .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(fail("header format version mismatch"));
        }
        check_vocab(&header.config, &header.vocab)?;

        let mut read = |shape: &[usize]| -> Result<Tensor<f32>> {
            let n: usize = shape.iter().product();
            let raw = cursor.take(n.checked_mul(4).ok_or_else(|| fail("tensor too large"))?)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            Tensor::new(shape.to_vec(), data)
        };
        let mut named = Vec::with_capacity(header.tensors.len());
        for e in &header.tensors {
            named.push((e.name.clone(), read(&e.shape)?));
        }
        let optimizer = match &header.optimizer {
            None => None,
            Some(h) => {
                let m = header.tensors.iter().map(|e| read(&e.shape)).collect::<Result<Vec<_>>>()?;
                let v = header.tensors.iter().map(|e| read(&e.shape)).collect::<Result<Vec<_>>>()?;
                Some(AdamState {
                    step: h.step,
                    m,
                    v,
                    beta1: h.beta1,
                    beta2: h.beta2,
                    epsilon: h.epsilon,
                    learning_rate: h.learning_rate,
                })
            }
        };
        if cursor.pos != body.len() {
            return Err(fail("trailing bytes after tensor payload"));
        }
        let model = TaggerModel::from_named(header.config, named)?;
        Ok(Checkpoint {
            vocab: header.vocab,
            model,
            optimizer,
            metadata: header.metadata,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint("unexpected end of file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
}

fn check_vocab(config: &TaggerConfig, vocab: &CharVocab) -> Result<()> {
    if config.char_vocab_size != vocab.len() {
        return Err(Error::Checkpoint(format!(
            "vocabulary has {} entries but the model expects {}",
            vocab.len(),
            config.char_vocab_size
        )));
    }
    config.validate()
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &ckpt.to_bytes()?)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&fs::read(path)?)
}

/// Hex SHA-256 over every parameter's name, shape and values (as f64 bits).
pub fn parameter_digest<T: Scalar>(params: &ParamStore<T>) -> String {
    let mut h = Sha256::new();
    for (_, name, t) in params.iter() {
        h.update(name.as_bytes());
        for d in t.shape() {
            h.update((*d as u64).to_le_bytes());
        }
        for v in t.data() {
            h.update(v.as_f64().to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
