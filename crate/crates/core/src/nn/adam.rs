use crate::error::{Error, Result};
use crate::nn::params::{Gradients, ParamStore};
use crate::nn::Tensor;
use crate::scalar::Scalar;

/// Adam moments and hyperparameters for one [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub step: u64,
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    pub learning_rate: T,
}

impl<T: Scalar> AdamState<T> {
    /// Zero moments with beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
    pub fn new(store: &ParamStore<T>, learning_rate: T) -> Self {
        let zeros = || store.iter().map(|(_, _, t)| Tensor::zeros(t.shape())).collect();
        AdamState {
            step: 0,
            m: zeros(),
            v: zeros(),
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            epsilon: T::of(1e-8),
            learning_rate,
        }
    }
}

/// Applies one bias-corrected Adam update in place.
pub fn adam_step<T: Scalar>(
    params: &mut ParamStore<T>,
    grads: &Gradients<T>,
    state: &mut AdamState<T>,
) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::dim(
            "adam",
            params.len(),
            format!("grads {}, m {}, v {}", grads.len(), state.m.len(), state.v.len()),
        ));
    }
    for ((id, _, p), (g, (m, v))) in params
        .iter()
        .zip(grads.iter().zip(state.m.iter().zip(&state.v)))
    {
        if p.shape() != g.shape() || p.shape() != m.shape() || p.shape() != v.shape() {
            return Err(Error::dim(
                "adam",
                format!("{:?}", p.shape()),
                format!("{} grad {:?}", id.index(), g.shape()),
            ));
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = T::one() - b1.powi(t);
    let c2 = T::one() - b2.powi(t);
    let ids: Vec<_> = params.ids().collect();
    for (k, id) in ids.into_iter().enumerate() {
        let g = grads.get(id).data();
        let m = state.m[k].data_mut();
        let v = state.v[k].data_mut();
        let p = params.get_mut(id).data_mut();
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (T::one() - b1) * g[i];
            v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}
