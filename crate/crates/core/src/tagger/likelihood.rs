use crate::error::{Error, Result};
use crate::nn::{gru_cell_tape, GruIds, Gradients, Tape, Var};
use crate::scalar::Scalar;
use crate::segmentation::{Tag, TagSequence};
use crate::tagger::inference::{check_ids, prev_tag_index};
use crate::tagger::model::TaggerModel;

fn stack_on_tape<T: Scalar>(
    tape: &mut Tape<'_, T>,
    cells: &[GruIds],
    inputs: &[Var],
    hidden: usize,
    reverse: bool,
) -> Result<Vec<Var>> {
    let mut seq = inputs.to_vec();
    for cell in cells {
        let mut out = seq.clone();
        let mut h = tape.constant(vec![T::zero(); hidden]);
        let n = seq.len();
        for k in 0..n {
            let i = if reverse { n - 1 - k } else { k };
            h = gru_cell_tape(tape, cell, seq[i], h)?;
            out[i] = h;
        }
        seq = out;
    }
    Ok(seq)
}

/// Records the teacher-forced log-likelihood `Σ log P(yᵢ | y₍<ᵢ₎, X)` and
/// returns its scalar var.
pub fn record_log_likelihood<T: Scalar>(
    tape: &mut Tape<'_, T>,
    model: &TaggerModel<T>,
    char_ids: &[usize],
    gold: &TagSequence,
) -> Result<Var> {
    check_ids(model, char_ids)?;
    if gold.len() != char_ids.len() {
        return Err(Error::contract(format!(
            "{} characters but {} gold tags",
            char_ids.len(),
            gold.len()
        )));
    }
    let ids = model.ids();
    let cfg = model.config();
    let embs = char_ids
        .iter()
        .map(|&c| tape.lookup(ids.char_embeddings, c))
        .collect::<Result<Vec<_>>>()?;
    let fwd = stack_on_tape(tape, &ids.fwd_encoder, &embs, cfg.encoder_units_per_layer, false)?;
    let bwd = stack_on_tape(tape, &ids.bwd_encoder, &embs, cfg.encoder_units_per_layer, true)?;

    let mut hs: Vec<Var> = (0..cfg.decoder_layers)
        .map(|_| tape.constant(vec![T::zero(); cfg.decoder_units]))
        .collect();
    let mut terms = Vec::with_capacity(char_ids.len());
    let mut prev: Option<Tag> = None;
    for (pos, &tag) in gold.tags().iter().enumerate() {
        let tag_emb = tape.lookup(ids.tag_embeddings, prev_tag_index(prev))?;
        let mut x = tape.concat(&[fwd[pos], bwd[pos], embs[pos], tag_emb]);
        for (cell, h) in ids.decoder.iter().zip(hs.iter_mut()) {
            *h = gru_cell_tape(tape, cell, x, *h)?;
            x = *h;
        }
        let logits = tape.matvec(ids.output_weight, x)?;
        let logits = tape.add_bias(logits, ids.output_bias)?;
        let lp = tape.log_softmax(logits);
        terms.push(tape.pick(lp, tag.index())?);
        prev = Some(tag);
    }
    tape.sum_scalars(&terms)
}

/// Teacher-forced log-likelihood of `gold`.
pub fn sequence_log_likelihood<T: Scalar>(
    model: &TaggerModel<T>,
    char_ids: &[usize],
    gold: &TagSequence,
) -> Result<T> {
    let mut tape = Tape::new(model.params());
    let ll = record_log_likelihood(&mut tape, model, char_ids, gold)?;
    let v = tape.scalar(ll);
    if !v.is_finite() {
        return Err(Error::NonFinite("sequence log-likelihood".into()));
    }
    Ok(v)
}

/// Negative log-likelihood of one example and its gradient.
pub fn nll_and_gradients<T: Scalar>(
    model: &TaggerModel<T>,
    char_ids: &[usize],
    gold: &TagSequence,
) -> Result<(T, Gradients<T>)> {
    let mut tape = Tape::new(model.params());
    let ll = record_log_likelihood(&mut tape, model, char_ids, gold)?;
    let nll = tape.scale(ll, -T::one());
    let grads = tape.backward(nll)?;
    Ok((tape.scalar(nll), grads))
}
