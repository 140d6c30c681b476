use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named parameter tensors in registration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore<T> {
    names: Vec<String>,
    tensors: Vec<Tensor<T>>,
    by_name: HashMap<String, ParamId>,
}

impl<T: Scalar> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore {
            names: Vec::new(),
            tensors: Vec::new(),
            by_name: HashMap::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor<T>) -> Result<ParamId> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::contract(format!("duplicate parameter name {name}")));
        }
        let id = ParamId(self.tensors.len());
        self.by_name.insert(name.clone(), id);
        self.names.push(name);
        self.tensors.push(tensor);
        Ok(id)
    }

    pub fn get(&self, id: ParamId) -> &Tensor<T> {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.tensors[id.0]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor<T>)> {
        self.names
            .iter()
            .zip(&self.tensors)
            .enumerate()
            .map(|(i, (n, t))| (ParamId(i), n.as_str(), t))
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::all_finite)
    }

    /// Converts every tensor to another scalar type, keeping names and order.
    pub fn cast<U: Scalar>(&self) -> ParamStore<U> {
        let tensors = self
            .tensors
            .iter()
            .map(|t| {
                let data = t.data().iter().map(|v| U::of(v.as_f64())).collect();
                Tensor::new(t.shape().to_vec(), data).expect("shape preserved")
            })
            .collect();
        ParamStore {
            names: self.names.clone(),
            tensors,
            by_name: self.by_name.clone(),
        }
    }
}

/// One gradient tensor per parameter, aligned with a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    grads: Vec<Tensor<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(store: &ParamStore<T>) -> Self {
        Gradients {
            grads: store.tensors.iter().map(|t| Tensor::zeros(t.shape())).collect(),
        }
    }

    pub fn get(&self, id: ParamId) -> &Tensor<T> {
        &self.grads[id.0]
    }

    pub(crate) fn get_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.grads[id.0]
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tensor<T>> {
        self.grads.iter()
    }

    pub fn add_assign(&mut self, other: &Gradients<T>) -> Result<()> {
        if self.grads.len() != other.grads.len() {
            return Err(Error::dim("gradient accumulate", self.grads.len(), other.grads.len()));
        }
        for (a, b) in self.grads.iter_mut().zip(&other.grads) {
            if a.shape() != b.shape() {
                return Err(Error::dim(
                    "gradient accumulate",
                    format!("{:?}", a.shape()),
                    format!("{:?}", b.shape()),
                ));
            }
            for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += *y;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: T) {
        for g in &mut self.grads {
            g.data_mut().iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn global_norm(&self) -> T {
        self.grads
            .iter()
            .flat_map(|g| g.data())
            .map(|v| *v * *v)
            .sum::<T>()
            .sqrt()
    }

    /// Rescales all gradients so the global L2 norm is at most `max_norm`.
    /// Returns the norm before clipping.
    pub fn clip_global_norm(&mut self, max_norm: T) -> T {
        let norm = self.global_norm();
        if norm > max_norm && norm > T::zero() {
            self.scale(max_norm / norm);
        }
        norm
    }

    pub fn all_finite(&self) -> bool {
        self.grads.iter().all(Tensor::all_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let mut s = ParamStore::<f32>::new();
        s.add("w", Tensor::zeros(&[2])).unwrap();
        assert!(s.add("w", Tensor::zeros(&[2])).is_err());
        assert_eq!(s.id("w"), Some(ParamId(0)));
    }

    #[test]
    fn clip_scales_to_max_norm() {
        let mut s = ParamStore::<f64>::new();
        let id = s.add("w", Tensor::zeros(&[2])).unwrap();
        let mut g = Gradients::zeros_like(&s);
        g.get_mut(id).data_mut().copy_from_slice(&[30.0, 40.0]);
        let before = g.clip_global_norm(5.0);
        assert_eq!(before, 50.0);
        assert!((g.global_norm() - 5.0).abs() < 1e-12);
        assert_eq!(g.get(id).data(), &[3.0, 4.0]);
    }

    #[test]
    fn clip_leaves_small_gradients() {
        let mut s = ParamStore::<f64>::new();
        let id = s.add("w", Tensor::zeros(&[2])).unwrap();
        let mut g = Gradients::zeros_like(&s);
        g.get_mut(id).data_mut().copy_from_slice(&[0.3, 0.4]);
        g.clip_global_norm(5.0);
        assert_eq!(g.get(id).data(), &[0.3, 0.4]);
    }
}
