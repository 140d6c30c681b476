use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::nn::Tensor;
use crate::scalar::Scalar;

/// Seeded source for parameter initialization.
pub struct Initializer {
    rng: ChaCha8Rng,
}

impl Initializer {
    pub fn new(seed: u64) -> Self {
        Initializer {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Glorot uniform: U(−s, s) with s = sqrt(6 / (fan_in + fan_out)).
    pub fn glorot<T: Scalar>(&mut self, t: &mut Tensor<T>) {
        let (fan_out, fan_in) = (t.rows(), t.cols());
        let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
        self.uniform(t, s);
    }

    pub fn uniform<T: Scalar>(&mut self, t: &mut Tensor<T>, scale: f64) {
        for v in t.data_mut() {
            *v = T::of(self.rng.gen_range(-scale..=scale));
        }
    }

    pub fn normal<T: Scalar>(&mut self, t: &mut Tensor<T>, std_dev: f64) {
        let dist = Normal::new(0.0, std_dev).expect("positive std dev");
        for v in t.data_mut() {
            *v = T::of(dist.sample(&mut self.rng));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glorot_respects_bound_and_seed() {
        let mut a = Tensor::<f32>::zeros(&[4, 8]);
        let mut b = Tensor::<f32>::zeros(&[4, 8]);
        Initializer::new(3).glorot(&mut a);
        Initializer::new(3).glorot(&mut b);
        assert_eq!(a, b);
        let s = (6.0f32 / 12.0).sqrt();
        assert!(a.data().iter().all(|v| v.abs() <= s));
        assert!(a.data().iter().any(|v| *v != 0.0));
    }
}
