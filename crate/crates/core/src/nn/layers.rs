use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::scalar::Scalar;

/// Row `id` of a `[vocab_size, dim]` embedding table.
pub fn embedding_lookup<T: Scalar>(table: &Tensor<T>, id: usize) -> Result<&[T]> {
    if table.shape().len() != 2 {
        return Err(Error::dim("embedding table", "rank 2", table.shape().len()));
    }
    table.row(id).map_err(|_| Error::Index {
        context: "embedding lookup",
        index: id,
        size: table.rows(),
    })
}

pub fn log_softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + logits.iter().map(|v| (*v - max).exp()).sum::<T>().ln();
    logits.iter().map(|v| *v - lse).collect()
}

pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|v| (*v - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `softmax(w · h + b)`.
pub fn linear_softmax<T: Scalar>(h: &[T], w: &Tensor<T>, b: &Tensor<T>) -> Result<Vec<T>> {
    let mut logits = w.matvec(h)?;
    if b.len() != logits.len() {
        return Err(Error::dim("linear_softmax bias", logits.len(), b.len()));
    }
    for (l, bv) in logits.iter_mut().zip(b.data()) {
        *l += *bv;
    }
    let probs = softmax(&logits);
    if probs.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("linear_softmax output".into()));
    }
    Ok(probs)
}
