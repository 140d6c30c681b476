use std::cmp::Ordering;

use crate::data::CharVocab;
use crate::error::{Error, Result};
use crate::nn::{embedding_lookup, gru_step_unchecked, log_softmax, GruIds};
use crate::scalar::Scalar;
use crate::segmentation::{tags_to_segments, Segmentation, Tag, TagSequence};
use crate::tagger::config::SOS_INDEX;
use crate::tagger::model::TaggerModel;

/// Top-layer encoder outputs and input embeddings, one entry per character.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderStates<T> {
    pub fwd: Vec<Vec<T>>,
    pub bwd: Vec<Vec<T>>,
    pub char_embs: Vec<Vec<T>>,
}

impl<T> EncoderStates<T> {
    pub fn len(&self) -> usize {
        self.char_embs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.char_embs.is_empty()
    }
}

/// Hidden state of every decoder layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState<T>(pub Vec<Vec<T>>);

impl<T: Scalar> DecoderState<T> {
    pub fn initial(model: &TaggerModel<T>) -> Self {
        let c = model.config();
        DecoderState(vec![vec![T::zero(); c.decoder_units]; c.decoder_layers])
    }
}

/// Tag-embedding row fed to the decoder: `None` is the start-of-sequence tag.
pub(crate) fn prev_tag_index(prev: Option<Tag>) -> usize {
    prev.map_or(SOS_INDEX, Tag::index)
}

pub(crate) fn check_ids<T: Scalar>(model: &TaggerModel<T>, char_ids: &[usize]) -> Result<()> {
    if char_ids.is_empty() {
        return Err(Error::contract("cannot tag an empty input"));
    }
    let vocab = model.config().char_vocab_size;
    if let Some(&bad) = char_ids.iter().find(|&&id| id >= vocab) {
        return Err(Error::Index {
            context: "character vocabulary",
            index: bad,
            size: vocab,
        });
    }
    Ok(())
}

fn run_stack<T: Scalar>(
    model: &TaggerModel<T>,
    cells: &[GruIds],
    inputs: &[Vec<T>],
    reverse: bool,
) -> Vec<Vec<T>> {
    let hidden = model.config().encoder_units_per_layer;
    let mut seq = inputs.to_vec();
    for cell in cells {
        let w = model.gru(cell);
        let mut out = vec![Vec::new(); seq.len()];
        let mut h = vec![T::zero(); hidden];
        let order: Box<dyn Iterator<Item = usize>> = if reverse {
            Box::new((0..seq.len()).rev())
        } else {
            Box::new(0..seq.len())
        };
        for i in order {
            h = gru_step_unchecked(&seq[i], &h, &w);
            out[i] = h.clone();
        }
        seq = out;
    }
    seq
}

/// Runs the forward and backward encoder stacks from zero initial states.
pub fn encode<T: Scalar>(model: &TaggerModel<T>, char_ids: &[usize]) -> Result<EncoderStates<T>> {
    check_ids(model, char_ids)?;
    let table = model.params().get(model.ids().char_embeddings);
    let char_embs = char_ids
        .iter()
        .map(|&id| embedding_lookup(table, id).map(<[T]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    let fwd = run_stack(model, &model.ids().fwd_encoder, &char_embs, false);
    let bwd = run_stack(model, &model.ids().bwd_encoder, &char_embs, true);
    let states = EncoderStates { fwd, bwd, char_embs };
    if states
        .fwd
        .iter()
        .chain(&states.bwd)
        .flatten()
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("encoder states".into()));
    }
    Ok(states)
}

/// Log-probabilities over {B, I} at `pos` (0-based) and the next decoder state.
pub fn decode_step_log<T: Scalar>(
    model: &TaggerModel<T>,
    states: &EncoderStates<T>,
    pos: usize,
    prev_tag: Option<Tag>,
    h_dec: &DecoderState<T>,
) -> Result<([T; 2], DecoderState<T>)> {
    if pos >= states.len() {
        return Err(Error::contract(format!(
            "decode position {pos} outside input of length {}",
            states.len()
        )));
    }
    if (pos == 0) != prev_tag.is_none() {
        return Err(Error::contract(
            "the start tag is fed at the first position and only there",
        ));
    }
    let ids = model.ids();
    let tag_emb = embedding_lookup(model.params().get(ids.tag_embeddings), prev_tag_index(prev_tag))?;
    let mut x = Vec::with_capacity(model.config().decoder_input_size());
    x.extend_from_slice(&states.fwd[pos]);
    x.extend_from_slice(&states.bwd[pos]);
    x.extend_from_slice(&states.char_embs[pos]);
    x.extend_from_slice(tag_emb);

    let mut next = Vec::with_capacity(ids.decoder.len());
    for (cell, h) in ids.decoder.iter().zip(&h_dec.0) {
        let h_new = gru_step_unchecked(&x, h, &model.gru(cell));
        x = h_new.clone();
        next.push(h_new);
    }
    let w = model.params().get(ids.output_weight);
    let b = model.params().get(ids.output_bias);
    let mut logits = w.matvec(&x)?;
    for (l, bv) in logits.iter_mut().zip(b.data()) {
        *l += *bv;
    }
    let lp = log_softmax(&logits);
    if lp.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("decoder output".into()));
    }
    Ok(([lp[0], lp[1]], DecoderState(next)))
}

/// Probabilities over {B, I} at `pos` (0-based) and the next decoder state.
pub fn decode_step<T: Scalar>(
    model: &TaggerModel<T>,
    states: &EncoderStates<T>,
    pos: usize,
    prev_tag: Option<Tag>,
    h_dec: &DecoderState<T>,
) -> Result<([T; 2], DecoderState<T>)> {
    let (lp, next) = decode_step_log(model, states, pos, prev_tag, h_dec)?;
    Ok(([lp[0].exp(), lp[1].exp()], next))
}

/// A decoded tag sequence with its log-probability under the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded<T> {
    pub tags: TagSequence,
    pub log_prob: T,
}

struct Hypothesis<T> {
    tags: Vec<Tag>,
    score: T,
    state: DecoderState<T>,
}

fn rank<T: Scalar>(a: &Hypothesis<T>, b: &Hypothesis<T>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.tags.cmp(&b.tags))
}

/// Position-synchronous beam search. The first tag is always `B`; its
/// log-probability is still counted in the score.
pub fn beam_search<T: Scalar>(
    model: &TaggerModel<T>,
    char_ids: &[usize],
    beam_size: usize,
) -> Result<Decoded<T>> {
    if beam_size == 0 {
        return Err(Error::contract("beam size must be at least 1"));
    }
    let states = encode(model, char_ids)?;
    let (lp, state) = decode_step_log(model, &states, 0, None, &DecoderState::initial(model))?;
    let mut beam = vec![Hypothesis {
        tags: vec![Tag::B],
        score: lp[Tag::B.index()],
        state,
    }];
    for pos in 1..states.len() {
        let mut expanded = Vec::with_capacity(beam.len() * 2);
        for hyp in &beam {
            let prev = *hyp.tags.last().expect("nonempty");
            let (lp, state) = decode_step_log(model, &states, pos, Some(prev), &hyp.state)?;
            for tag in Tag::ALL {
                let mut tags = hyp.tags.clone();
                tags.push(tag);
                expanded.push(Hypothesis {
                    tags,
                    score: hyp.score + lp[tag.index()],
                    state: state.clone(),
                });
            }
        }
        expanded.sort_by(rank);
        expanded.truncate(beam_size);
        beam = expanded;
    }
    let best = beam.into_iter().min_by(rank).expect("beam is never empty");
    Ok(Decoded {
        tags: TagSequence::new(best.tags)?,
        log_prob: best.score,
    })
}

/// Picks the most probable tag at each step, feeding it back to the decoder.
pub fn greedy_decode<T: Scalar>(model: &TaggerModel<T>, char_ids: &[usize]) -> Result<Decoded<T>> {
    let states = encode(model, char_ids)?;
    let mut h = DecoderState::initial(model);
    let mut tags = Vec::with_capacity(states.len());
    let mut score = T::zero();
    for pos in 0..states.len() {
        let (lp, next) = decode_step_log(model, &states, pos, tags.last().copied(), &h)?;
        let tag = if pos == 0 || lp[0] >= lp[1] { Tag::B } else { Tag::I };
        score += lp[tag.index()];
        tags.push(tag);
        h = next;
    }
    Ok(Decoded {
        tags: TagSequence::new(tags)?,
        log_prob: score,
    })
}

/// Maps characters through `vocab`, decodes with the given beam and splits.
pub fn segment<T: Scalar>(
    model: &TaggerModel<T>,
    vocab: &CharVocab,
    raw: &str,
    beam_size: usize,
) -> Result<Segmentation> {
    if raw.is_empty() {
        return Err(Error::contract("cannot segment an empty string"));
    }
    let ids = vocab.encode(raw);
    let decoded = beam_search(model, &ids, beam_size)?;
    tags_to_segments(raw, &decoded.tags)
}
