use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::scalar::Real;

/// `rows × cols` matrix with entries uniform on `(-a, a)`.
pub fn uniform<T: Real, R: Rng>(rows: usize, cols: usize, a: f64, rng: &mut R) -> Array2<T> {
    if a == 0.0 {
        return Array2::zeros((rows, cols));
    }
    let dist = Uniform::new(-a, a).expect("a > 0");
    Array2::from_shape_simple_fn((rows, cols), || T::lit(dist.sample(rng)))
}

/// Glorot/Xavier uniform: `a = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<T: Real, R: Rng>(
    rows: usize,
    cols: usize,
    fan_in: usize,
    fan_out: usize,
    rng: &mut R,
) -> Array2<T> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    uniform(rows, cols, a, rng)
}
