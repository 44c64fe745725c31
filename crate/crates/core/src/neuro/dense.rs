use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::init::glorot_uniform;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Tanh,
    Sigmoid,
    /// Row-wise softmax over the last axis.
    Softmax,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Softmax => "softmax",
        }
    }
}

/// Affine map `g(W x + b)` along the last axis.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer<T> {
    /// `d_out × d_in`.
    pub weights: Array2<T>,
    pub bias: Array1<T>,
    pub activation: Activation,
}

pub(crate) struct DenseCache<T> {
    input: Array2<T>,
    output: Array2<T>,
}

impl<T: Real> DenseLayer<T> {
    pub fn zeros(d_in: usize, d_out: usize, activation: Activation) -> Self {
        Self {
            weights: Array2::zeros((d_out, d_in)),
            bias: Array1::zeros(d_out),
            activation,
        }
    }

    pub fn glorot<R: Rng>(d_in: usize, d_out: usize, activation: Activation, rng: &mut R) -> Self {
        Self {
            weights: glorot_uniform(d_out, d_in, d_in, d_out, rng),
            bias: Array1::zeros(d_out),
            activation,
        }
    }

    pub fn d_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.weights.nrows()
    }

    fn affine(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let mut z = x.dot(&self.weights.t());
        z += &self.bias;
        z
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        if x.shape().last() != Some(&self.d_in()) {
            return Err(Error::Dimension(format!(
                "dense layer expects last axis {}, got shape {:?}",
                self.d_in(),
                x.shape()
            )));
        }
        Ok(())
    }

    fn output_tensor(&self, x: &Tensor<T>, out: Array2<T>) -> Tensor<T> {
        let mut shape = x.shape().to_vec();
        *shape.last_mut().expect("nonempty shape") = self.d_out();
        Tensor::new(shape, out.into_raw_vec_and_offset().0).expect("dense output shape")
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_input(x)?;
        let mut z = self.affine(x.as_matrix());
        apply_activation(self.activation, &mut z);
        Ok(self.output_tensor(x, z))
    }

    pub(crate) fn forward_cached(&self, x: &Tensor<T>) -> Result<(Tensor<T>, DenseCache<T>)> {
        self.check_input(x)?;
        let input = x.as_matrix().to_owned();
        let mut z = self.affine(input.view());
        apply_activation(self.activation, &mut z);
        let out = self.output_tensor(x, z.clone());
        Ok((out, DenseCache { input, output: z }))
    }

    /// Backpropagates either an output gradient or, when `at_logits` is set, a
    /// gradient already taken with respect to the pre-activation.
    ///
    /// Returns `(d_input, [d_weights, d_bias])`.
    pub(crate) fn backward(
        &self,
        cache: &DenseCache<T>,
        grad: &Tensor<T>,
        input_shape: &[usize],
        at_logits: bool,
    ) -> Result<(Tensor<T>, [Vec<T>; 2])> {
        let g = grad.as_matrix();
        let dz = if at_logits {
            g.to_owned()
        } else {
            activation_backward(self.activation, cache.output.view(), g)
        };
        let dw = dz.t().dot(&cache.input);
        let db = dz.sum_axis(Axis(0));
        let dx = dz.dot(&self.weights);
        let dx = Tensor::new(input_shape.to_vec(), dx.into_raw_vec_and_offset().0)?;
        Ok((dx, [dw.into_raw_vec_and_offset().0, db.into_raw_vec_and_offset().0]))
    }
}

pub(crate) fn apply_activation<T: Real>(act: Activation, z: &mut Array2<T>) {
    match act {
        Activation::Identity => {}
        Activation::Tanh => T::tanh_slice(z.as_slice_mut().expect("contiguous activations")),
        Activation::Sigmoid => T::expit_slice(z.as_slice_mut().expect("contiguous activations")),
        Activation::Softmax => {
            for mut row in z.rows_mut() {
                softmax_in_place(row.as_slice_mut().expect("contiguous rows"));
            }
        }
    }
}

/// Numerically stable softmax.
pub fn softmax_in_place<T: Real>(row: &mut [T]) {
    let m = row.iter().copied().fold(T::neg_infinity(), T::max);
    let mut s = T::zero();
    for v in row.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in row.iter_mut() {
        *v /= s;
    }
}

fn activation_backward<T: Real>(act: Activation, out: ArrayView2<'_, T>, grad: ArrayView2<'_, T>) -> Array2<T> {
    match act {
        Activation::Identity => grad.to_owned(),
        Activation::Tanh => {
            let mut d = grad.to_owned();
            d.zip_mut_with(&out, |g, &a| *g *= T::one() - a * a);
            d
        }
        Activation::Sigmoid => {
            let mut d = grad.to_owned();
            d.zip_mut_with(&out, |g, &a| *g = *g * a * (T::one() - a));
            d
        }
        Activation::Softmax => {
            let mut d = grad.to_owned();
            for (mut drow, arow) in d.rows_mut().into_iter().zip(out.rows()) {
                let dot = drow.iter().zip(arow.iter()).fold(T::zero(), |s, (&g, &a)| s + g * a);
                drow.zip_mut_with(&arow, |g, &a| *g = a * (*g - dot));
            }
            d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_layer_outputs_zero() {
        let l = DenseLayer::<f64>::zeros(3, 2, Activation::Identity);
        let x = Tensor::new(vec![1, 3], vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(l.forward(&x).unwrap().data(), &[0.0, 0.0]);
    }

    #[test]
    fn identity_weights_pass_input_through() {
        let l = DenseLayer {
            weights: Array2::<f64>::eye(3),
            bias: Array1::zeros(3),
            activation: Activation::Identity,
        };
        let x = Tensor::new(vec![2, 3], vec![1.0, -2.0, 0.5, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(l.forward(&x).unwrap(), x);
    }

    #[test]
    fn tanh_hand_instance() {
        let l = DenseLayer {
            weights: array![[0.5, -1.0], [2.0, 0.25]],
            bias: array![0.1, -0.2],
            activation: Activation::Tanh,
        };
        let x = Tensor::new(vec![1, 2], vec![1.0, 2.0]).unwrap();
        let y = l.forward(&x).unwrap();
        let e0 = (0.5 * 1.0 - 1.0 * 2.0 + 0.1f64).tanh();
        let e1 = (2.0 * 1.0 + 0.25 * 2.0 - 0.2f64).tanh();
        assert!((y.data()[0] - e0).abs() < 1e-15);
        assert!((y.data()[1] - e1).abs() < 1e-15);
    }

    #[test]
    fn dense_applies_along_last_axis_of_sequences() {
        let l = DenseLayer {
            weights: array![[2.0]],
            bias: array![1.0],
            activation: Activation::Identity,
        };
        let x = Tensor::new(vec![1, 3, 1], vec![1.0, 2.0, 3.0]).unwrap();
        let y = l.forward(&x).unwrap();
        assert_eq!(y.shape(), &[1, 3, 1]);
        assert_eq!(y.data(), &[3.0, 5.0, 7.0]);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let l = DenseLayer::<f64>::zeros(3, 2, Activation::Identity);
        let x = Tensor::new(vec![1, 2], vec![1.0, 2.0]).unwrap();
        assert!(l.forward(&x).is_err());
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut z = array![[1000.0, 999.0, 995.0], [0.0, 0.0, 0.0]];
        apply_activation(Activation::Softmax, &mut z);
        for row in z.rows() {
            assert!((row.sum() - 1.0f64).abs() < 1e-12);
            assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }
}
