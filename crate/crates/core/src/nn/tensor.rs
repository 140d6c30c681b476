use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major array. Matrices are `[rows, cols]`, vectors `[len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::dim("tensor", expected, data.len()));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![T::zero(); n],
        }
    }

    pub fn vector(data: Vec<T>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    pub fn cols(&self) -> usize {
        match self.shape.len() {
            2 => self.shape[1],
            1 => 1,
            _ => 0,
        }
    }

    pub fn row(&self, i: usize) -> Result<&[T]> {
        if self.shape.len() != 2 {
            return Err(Error::dim("row access", "rank 2", self.shape.len()));
        }
        let rows = self.shape[0];
        if i >= rows {
            return Err(Error::Index {
                context: "tensor row",
                index: i,
                size: rows,
            });
        }
        let c = self.shape[1];
        Ok(&self.data[i * c..(i + 1) * c])
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// `self · x` for a `[rows, cols]` matrix and a `cols` vector.
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if self.shape.len() != 2 || self.shape[1] != x.len() {
            return Err(Error::dim(
                "matvec",
                format!("[_, {}]", x.len()),
                format!("{:?}", self.shape),
            ));
        }
        let mut out = vec![T::zero(); self.shape[0]];
        matvec_into(&self.data, self.shape[1], x, &mut out);
        Ok(out)
    }
}

/// Row-major `out = w · x` where `w` has `x.len()` columns.
pub(crate) fn matvec_into<T: Scalar>(w: &[T], cols: usize, x: &[T], out: &mut [T]) {
    for (o, row) in out.iter_mut().zip(w.chunks_exact(cols)) {
        *o = dot(row, x);
    }
}

/// `acc += wᵀ · g` for row-major `w` with `acc.len()` columns.
pub(crate) fn matvec_transpose_acc<T: Scalar>(w: &[T], cols: usize, g: &[T], acc: &mut [T]) {
    for (gi, row) in g.iter().zip(w.chunks_exact(cols)) {
        if gi.is_zero() {
            continue;
        }
        for (a, wv) in acc.iter_mut().zip(row) {
            *a += *gi * *wv;
        }
    }
}

/// `acc += g ⊗ x` (outer product) for a row-major `[g.len(), x.len()]` accumulator.
pub(crate) fn outer_acc<T: Scalar>(g: &[T], x: &[T], acc: &mut [T]) {
    for (gi, row) in g.iter().zip(acc.chunks_exact_mut(x.len())) {
        if gi.is_zero() {
            continue;
        }
        for (a, xv) in row.iter_mut().zip(x) {
            *a += *gi * *xv;
        }
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    // Four accumulators let the compiler vectorize without reassociating a single sum.
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = i * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in chunks * 4..a.len() {
        s += a[j] * b[j];
    }
    s
}
