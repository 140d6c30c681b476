//! Reverse-mode differentiation over a recorded sequence of vector operations.
//!
//! A [`Tape`] borrows a [`ParamStore`] immutably while a forward pass is
//! recorded. Operations that read parameters (`matvec`, `add_bias`, `lookup`,
//! `param`) refer to them by [`ParamId`], so weight matrices are never copied
//! onto the tape. [`Tape::backward`] walks the recording in reverse and
//! returns a [`Gradients`] aligned with the store; parameters the forward pass
//! never touched come back as zeros.

use crate::error::{Error, Result};
use crate::nn::params::{Gradients, ParamId, ParamStore};
use crate::nn::tensor::{matvec_into, matvec_transpose_acc, outer_acc};
use crate::scalar::Scalar;

/// Handle to a value recorded on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op<T> {
    Constant,
    Param(ParamId),
    Lookup(ParamId, usize),
    MatVec(ParamId, Var),
    AddBias(Var, ParamId),
    Add(Var, Var),
    Mul(Var, Var),
    OneMinus(Var),
    Sigmoid(Var),
    Tanh(Var),
    Concat(Vec<Var>),
    LogSoftmax(Var),
    Pick(Var, usize),
    Sum(Var),
    Scale(Var, T),
}

#[derive(Debug)]
struct Node<T> {
    value: Vec<T>,
    op: Op<T>,
}

pub struct Tape<'p, T> {
    params: &'p ParamStore<T>,
    nodes: Vec<Node<T>>,
}

impl<'p, T: Scalar> Tape<'p, T> {
    pub fn new(params: &'p ParamStore<T>) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn params(&self) -> &'p ParamStore<T> {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[T] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> T {
        self.nodes[v.0].value[0]
    }

    fn push(&mut self, value: Vec<T>, op: Op<T>) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Vec<T>) -> Var {
        self.push(value, Op::Constant)
    }

    /// Whole parameter tensor as a flat vector.
    pub fn param(&mut self, id: ParamId) -> Var {
        let value = self.params.get(id).data().to_vec();
        self.push(value, Op::Param(id))
    }

    /// Row `row` of an embedding table.
    pub fn lookup(&mut self, table: ParamId, row: usize) -> Result<Var> {
        let value = crate::nn::embedding_lookup(self.params.get(table), row)?.to_vec();
        Ok(self.push(value, Op::Lookup(table, row)))
    }

    pub fn matvec(&mut self, w: ParamId, x: Var) -> Result<Var> {
        let wt = self.params.get(w);
        let xv = &self.nodes[x.0].value;
        if wt.shape().len() != 2 || wt.shape()[1] != xv.len() {
            return Err(Error::dim(
                "tape matvec",
                format!("[_, {}]", xv.len()),
                format!("{:?}", wt.shape()),
            ));
        }
        let mut out = vec![T::zero(); wt.shape()[0]];
        matvec_into(wt.data(), wt.shape()[1], xv, &mut out);
        Ok(self.push(out, Op::MatVec(w, x)))
    }

    pub fn add_bias(&mut self, a: Var, b: ParamId) -> Result<Var> {
        let bt = self.params.get(b);
        let av = &self.nodes[a.0].value;
        if bt.len() != av.len() {
            return Err(Error::dim("tape bias", av.len(), bt.len()));
        }
        let out = av.iter().zip(bt.data()).map(|(x, y)| *x + *y).collect();
        Ok(self.push(out, Op::AddBias(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_values("tape add", a, b, |x, y| x + y)?;
        Ok(self.push(out, Op::Add(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_values("tape mul", a, b, |x, y| x * y)?;
        Ok(self.push(out, Op::Mul(a, b)))
    }

    fn zip_values(&self, ctx: &'static str, a: Var, b: Var, f: impl Fn(T, T) -> T) -> Result<Vec<T>> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.len() != bv.len() {
            return Err(Error::dim(ctx, av.len(), bv.len()));
        }
        Ok(av.iter().zip(bv).map(|(x, y)| f(*x, *y)).collect())
    }

    pub fn one_minus(&mut self, a: Var) -> Var {
        let out = self.nodes[a.0].value.iter().map(|x| T::one() - *x).collect();
        self.push(out, Op::OneMinus(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.nodes[a.0].value.iter().map(|x| sigmoid(*x)).collect();
        self.push(out, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.nodes[a.0].value.iter().map(|x| x.tanh()).collect();
        self.push(out, Op::Tanh(a))
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let mut out = Vec::with_capacity(parts.iter().map(|p| self.nodes[p.0].value.len()).sum());
        for p in parts {
            out.extend_from_slice(&self.nodes[p.0].value);
        }
        self.push(out, Op::Concat(parts.to_vec()))
    }

    pub fn log_softmax(&mut self, a: Var) -> Var {
        let out = crate::nn::log_softmax(&self.nodes[a.0].value);
        self.push(out, Op::LogSoftmax(a))
    }

    pub fn pick(&mut self, a: Var, index: usize) -> Result<Var> {
        let av = &self.nodes[a.0].value;
        let v = *av.get(index).ok_or(Error::Index {
            context: "tape pick",
            index,
            size: av.len(),
        })?;
        Ok(self.push(vec![v], Op::Pick(a, index)))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.nodes[a.0].value.iter().copied().sum();
        self.push(vec![s], Op::Sum(a))
    }

    pub fn scale(&mut self, a: Var, factor: T) -> Var {
        let out = self.nodes[a.0].value.iter().map(|x| *x * factor).collect();
        self.push(out, Op::Scale(a, factor))
    }

    /// Sums a list of scalar vars.
    pub fn sum_scalars(&mut self, vars: &[Var]) -> Result<Var> {
        let joined = self.concat(vars);
        if self.nodes[joined.0].value.len() != vars.len() {
            return Err(Error::dim("sum_scalars", vars.len(), self.nodes[joined.0].value.len()));
        }
        Ok(self.sum(joined))
    }

    /// d(loss)/d(param) for every parameter in the store.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        if self.nodes.is_empty() || loss.0 >= self.nodes.len() {
            return Err(Error::State(
                "backward called before a forward pass was recorded".into(),
            ));
        }
        let lv = &self.nodes[loss.0].value;
        if lv.len() != 1 {
            return Err(Error::dim("backward loss", 1, lv.len()));
        }
        if !lv[0].is_finite() {
            return Err(Error::NonFinite("loss".into()));
        }

        let mut grads = Gradients::zeros_like(self.params);
        let mut adj: Vec<Option<Vec<T>>> = vec![None; loss.0 + 1];
        adj[loss.0] = Some(vec![T::one()]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = adj[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant => {}
                Op::Param(id) => {
                    for (a, d) in grads.get_mut(*id).data_mut().iter_mut().zip(&g) {
                        *a += *d;
                    }
                }
                Op::Lookup(id, row) => {
                    let t = grads.get_mut(*id);
                    let cols = t.shape()[1];
                    let dst = &mut t.data_mut()[row * cols..(row + 1) * cols];
                    for (a, d) in dst.iter_mut().zip(&g) {
                        *a += *d;
                    }
                }
                Op::MatVec(w, x) => {
                    let wt = self.params.get(*w);
                    let cols = wt.shape()[1];
                    let xv = &self.nodes[x.0].value;
                    outer_acc(&g, xv, grads.get_mut(*w).data_mut());
                    let ax = accum(&mut adj, *x, cols);
                    matvec_transpose_acc(wt.data(), cols, &g, ax);
                }
                Op::AddBias(a, b) => {
                    for (x, d) in grads.get_mut(*b).data_mut().iter_mut().zip(&g) {
                        *x += *d;
                    }
                    add_into(accum(&mut adj, *a, g.len()), &g);
                }
                Op::Add(a, b) => {
                    add_into(accum(&mut adj, *a, g.len()), &g);
                    add_into(accum(&mut adj, *b, g.len()), &g);
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    let da = accum(&mut adj, *a, g.len());
                    for ((d, gi), y) in da.iter_mut().zip(&g).zip(bv) {
                        *d += *gi * *y;
                    }
                    let db = accum(&mut adj, *b, g.len());
                    for ((d, gi), x) in db.iter_mut().zip(&g).zip(av) {
                        *d += *gi * *x;
                    }
                }
                Op::OneMinus(a) => {
                    let da = accum(&mut adj, *a, g.len());
                    for (d, gi) in da.iter_mut().zip(&g) {
                        *d -= *gi;
                    }
                }
                Op::Sigmoid(a) => {
                    let da = accum(&mut adj, *a, g.len());
                    for ((d, gi), s) in da.iter_mut().zip(&g).zip(&node.value) {
                        *d += *gi * *s * (T::one() - *s);
                    }
                }
                Op::Tanh(a) => {
                    let da = accum(&mut adj, *a, g.len());
                    for ((d, gi), t) in da.iter_mut().zip(&g).zip(&node.value) {
                        *d += *gi * (T::one() - *t * *t);
                    }
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let n = self.nodes[p.0].value.len();
                        add_into(accum(&mut adj, *p, n), &g[offset..offset + n]);
                        offset += n;
                    }
                }
                Op::LogSoftmax(a) => {
                    // d/dx_j = g_j - softmax_j * sum(g)
                    let total: T = g.iter().copied().sum();
                    let da = accum(&mut adj, *a, g.len());
                    for ((d, gi), ls) in da.iter_mut().zip(&g).zip(&node.value) {
                        *d += *gi - ls.exp() * total;
                    }
                }
                Op::Pick(a, i) => {
                    let n = self.nodes[a.0].value.len();
                    accum(&mut adj, *a, n)[*i] += g[0];
                }
                Op::Sum(a) => {
                    let n = self.nodes[a.0].value.len();
                    for d in accum(&mut adj, *a, n).iter_mut() {
                        *d += g[0];
                    }
                }
                Op::Scale(a, f) => {
                    let da = accum(&mut adj, *a, g.len());
                    for (d, gi) in da.iter_mut().zip(&g) {
                        *d += *gi * *f;
                    }
                }
            }
        }

        if !grads.all_finite() {
            return Err(Error::NonFinite("gradients".into()));
        }
        Ok(grads)
    }
}

fn accum<T: Scalar>(adj: &mut [Option<Vec<T>>], v: Var, len: usize) -> &mut Vec<T> {
    adj[v.0].get_or_insert_with(|| vec![T::zero(); len])
}

fn add_into<T: Scalar>(dst: &mut [T], src: &[T]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += *s;
    }
}

pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    // Split on sign so exp never overflows.
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}
