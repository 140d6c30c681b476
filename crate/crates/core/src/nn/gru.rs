//! Gated recurrent unit, standard formulation:
//!
//! ```text
//! z = σ(W_z·x + U_z·h + b_z)
//! r = σ(W_r·x + U_r·h + b_r)
//! c = tanh(W_c·x + U_c·(r ⊙ h) + b_c)
//! h' = (1 − z) ⊙ h + z ⊙ c
//! ```

use crate::error::{Error, Result};
use crate::nn::params::{ParamId, ParamStore};
use crate::nn::tape::{sigmoid, Tape, Var};
use crate::nn::tensor::matvec_into;
use crate::nn::Tensor;
use crate::scalar::Scalar;

/// Borrowed view of one cell's nine parameter tensors.
#[derive(Debug, Clone, Copy)]
pub struct GruWeights<'a, T> {
    pub w_update: &'a Tensor<T>,
    pub w_reset: &'a Tensor<T>,
    pub w_cand: &'a Tensor<T>,
    pub u_update: &'a Tensor<T>,
    pub u_reset: &'a Tensor<T>,
    pub u_cand: &'a Tensor<T>,
    pub b_update: &'a Tensor<T>,
    pub b_reset: &'a Tensor<T>,
    pub b_cand: &'a Tensor<T>,
}

impl<T: Scalar> GruWeights<'_, T> {
    pub fn hidden_size(&self) -> usize {
        self.w_update.rows()
    }

    pub fn input_size(&self) -> usize {
        self.w_update.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let (h, i) = (self.hidden_size(), self.input_size());
        for w in [self.w_update, self.w_reset, self.w_cand] {
            if w.shape() != [h, i] {
                return Err(Error::dim("GRU input weights", format!("[{h}, {i}]"), format!("{:?}", w.shape())));
            }
        }
        for u in [self.u_update, self.u_reset, self.u_cand] {
            if u.shape() != [h, h] {
                return Err(Error::dim("GRU hidden weights", format!("[{h}, {h}]"), format!("{:?}", u.shape())));
            }
        }
        for b in [self.b_update, self.b_reset, self.b_cand] {
            if b.shape() != [h] {
                return Err(Error::dim("GRU bias", format!("[{h}]"), format!("{:?}", b.shape())));
            }
        }
        Ok(())
    }
}

/// Owned cell parameters, for use outside a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct GruCellParams<T> {
    pub w_update: Tensor<T>,
    pub w_reset: Tensor<T>,
    pub w_cand: Tensor<T>,
    pub u_update: Tensor<T>,
    pub u_reset: Tensor<T>,
    pub u_cand: Tensor<T>,
    pub b_update: Tensor<T>,
    pub b_reset: Tensor<T>,
    pub b_cand: Tensor<T>,
}

impl<T: Scalar> GruCellParams<T> {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        let w = || Tensor::zeros(&[hidden_size, input_size]);
        let u = || Tensor::zeros(&[hidden_size, hidden_size]);
        let b = || Tensor::zeros(&[hidden_size]);
        GruCellParams {
            w_update: w(),
            w_reset: w(),
            w_cand: w(),
            u_update: u(),
            u_reset: u(),
            u_cand: u(),
            b_update: b(),
            b_reset: b(),
            b_cand: b(),
        }
    }

    pub fn weights(&self) -> GruWeights<'_, T> {
        GruWeights {
            w_update: &self.w_update,
            w_reset: &self.w_reset,
            w_cand: &self.w_cand,
            u_update: &self.u_update,
            u_reset: &self.u_reset,
            u_cand: &self.u_cand,
            b_update: &self.b_update,
            b_reset: &self.b_reset,
            b_cand: &self.b_cand,
        }
    }
}

/// Parameter ids of one cell registered in a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GruIds {
    pub w_update: ParamId,
    pub w_reset: ParamId,
    pub w_cand: ParamId,
    pub u_update: ParamId,
    pub u_reset: ParamId,
    pub u_cand: ParamId,
    pub b_update: ParamId,
    pub b_reset: ParamId,
    pub b_cand: ParamId,
}

impl GruIds {
    /// Registers zero-initialized tensors named `{prefix}.w_update` etc.
    pub fn register<T: Scalar>(
        store: &mut ParamStore<T>,
        prefix: &str,
        input_size: usize,
        hidden_size: usize,
    ) -> Result<Self> {
        let mut add = |name: &str, shape: &[usize]| store.add(format!("{prefix}.{name}"), Tensor::zeros(shape));
        let (i, h) = (input_size, hidden_size);
        Ok(GruIds {
            w_update: add("w_update", &[h, i])?,
            w_reset: add("w_reset", &[h, i])?,
            w_cand: add("w_cand", &[h, i])?,
            u_update: add("u_update", &[h, h])?,
            u_reset: add("u_reset", &[h, h])?,
            u_cand: add("u_cand", &[h, h])?,
            b_update: add("b_update", &[h])?,
            b_reset: add("b_reset", &[h])?,
            b_cand: add("b_cand", &[h])?,
        })
    }

    pub fn weights<'a, T: Scalar>(&self, store: &'a ParamStore<T>) -> GruWeights<'a, T> {
        GruWeights {
            w_update: store.get(self.w_update),
            w_reset: store.get(self.w_reset),
            w_cand: store.get(self.w_cand),
            u_update: store.get(self.u_update),
            u_reset: store.get(self.u_reset),
            u_cand: store.get(self.u_cand),
            b_update: store.get(self.b_update),
            b_reset: store.get(self.b_reset),
            b_cand: store.get(self.b_cand),
        }
    }

    pub fn matrices(&self) -> [ParamId; 6] {
        [self.w_update, self.w_reset, self.w_cand, self.u_update, self.u_reset, self.u_cand]
    }

    pub fn biases(&self) -> [ParamId; 3] {
        [self.b_update, self.b_reset, self.b_cand]
    }
}

fn affine<T: Scalar>(w: &Tensor<T>, x: &[T], u: &Tensor<T>, h: &[T], b: &Tensor<T>) -> Vec<T> {
    let n = b.len();
    let mut out = vec![T::zero(); n];
    matvec_into(w.data(), x.len(), x, &mut out);
    let mut tmp = vec![T::zero(); n];
    matvec_into(u.data(), h.len(), h, &mut tmp);
    for ((o, t), bv) in out.iter_mut().zip(&tmp).zip(b.data()) {
        *o += *t + *bv;
    }
    out
}

/// One GRU step without recording gradients.
pub fn gru_cell_forward<T: Scalar>(x: &[T], h_prev: &[T], p: &GruWeights<'_, T>) -> Result<Vec<T>> {
    p.validate()?;
    if x.len() != p.input_size() {
        return Err(Error::dim("GRU input", p.input_size(), x.len()));
    }
    if h_prev.len() != p.hidden_size() {
        return Err(Error::dim("GRU hidden state", p.hidden_size(), h_prev.len()));
    }
    Ok(gru_step_unchecked(x, h_prev, p)).and_then(|h| {
        if h.iter().all(|v| v.is_finite()) {
            Ok(h)
        } else {
            Err(Error::NonFinite("GRU output".into()))
        }
    })
}

pub(crate) fn gru_step_unchecked<T: Scalar>(x: &[T], h: &[T], p: &GruWeights<'_, T>) -> Vec<T> {
    let z: Vec<T> = affine(p.w_update, x, p.u_update, h, p.b_update)
        .into_iter()
        .map(sigmoid)
        .collect();
    let r: Vec<T> = affine(p.w_reset, x, p.u_reset, h, p.b_reset)
        .into_iter()
        .map(sigmoid)
        .collect();
    let rh: Vec<T> = r.iter().zip(h).map(|(a, b)| *a * *b).collect();
    let c = affine(p.w_cand, x, p.u_cand, &rh, p.b_cand);
    z.iter()
        .zip(h)
        .zip(c)
        .map(|((zi, hi), ci)| (T::one() - *zi) * *hi + *zi * ci.tanh())
        .collect()
}

/// One GRU step recorded on a tape.
pub fn gru_cell_tape<T: Scalar>(tape: &mut Tape<'_, T>, ids: &GruIds, x: Var, h: Var) -> Result<Var> {
    let gate = |tape: &mut Tape<'_, T>, w: ParamId, u: ParamId, b: ParamId, hin: Var| -> Result<Var> {
        let wx = tape.matvec(w, x)?;
        let uh = tape.matvec(u, hin)?;
        let s = tape.add(wx, uh)?;
        tape.add_bias(s, b)
    };
    let z_pre = gate(tape, ids.w_update, ids.u_update, ids.b_update, h)?;
    let z = tape.sigmoid(z_pre);
    let r_pre = gate(tape, ids.w_reset, ids.u_reset, ids.b_reset, h)?;
    let r = tape.sigmoid(r_pre);
    let rh = tape.mul(r, h)?;
    let c_pre = gate(tape, ids.w_cand, ids.u_cand, ids.b_cand, rh)?;
    let c = tape.tanh(c_pre);
    let keep = tape.one_minus(z);
    let kept = tape.mul(keep, h)?;
    let fresh = tape.mul(z, c)?;
    tape.add(kept, fresh)
}
