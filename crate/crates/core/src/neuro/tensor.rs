use ndarray::{ArrayView2, ArrayView3, ArrayViewMut2, ArrayViewMut3, Ix2, Ix3};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major tensor; the first axis is always the batch axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![T::zero(); len],
        }
    }

    pub fn from_array2(a: ndarray::Array2<T>) -> Self {
        let shape = a.shape().to_vec();
        let data = if a.is_standard_layout() {
            a.into_raw_vec_and_offset().0
        } else {
            a.iter().copied().collect()
        };
        Self { shape, data }
    }

    /// `[n, len, 1]` sequence tensor from an `n × len` matrix of curves.
    pub fn sequences(curves: &ndarray::Array2<T>) -> Self {
        let (n, len) = curves.dim();
        let mut t = Self::from_array2(curves.clone());
        t.shape = vec![n, len, 1];
        t
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

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    /// Number of values per batch item.
    pub fn item_len(&self) -> usize {
        self.shape[1..].iter().product()
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != self.data.len() {
            return Err(Error::Dimension(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        self.shape = shape;
        Ok(self)
    }

    /// Rows `[batch, rest…]` gathered by batch index.
    pub fn gather(&self, rows: &[usize]) -> Self {
        let item = self.item_len();
        let mut data = Vec::with_capacity(rows.len() * item);
        for &r in rows {
            data.extend_from_slice(&self.data[r * item..(r + 1) * item]);
        }
        let mut shape = self.shape.clone();
        shape[0] = rows.len();
        Self { shape, data }
    }

    /// View as `[rows, last_dim]`, folding leading axes together.
    pub fn as_matrix(&self) -> ArrayView2<'_, T> {
        let last = *self.shape.last().expect("tensor has at least one axis");
        let rows = self.data.len() / last.max(1);
        ArrayView2::from_shape((rows, last), &self.data).expect("row-major layout")
    }

    pub fn as_matrix_mut(&mut self) -> ArrayViewMut2<'_, T> {
        let last = *self.shape.last().expect("tensor has at least one axis");
        let rows = self.data.len() / last.max(1);
        ArrayViewMut2::from_shape((rows, last), &mut self.data).expect("row-major layout")
    }

    pub fn view3(&self) -> Result<ArrayView3<'_, T>> {
        if self.ndim() != 3 {
            return Err(Error::Dimension(format!(
                "expected a [batch, time, features] tensor, got {:?}",
                self.shape
            )));
        }
        Ok(
            ArrayView3::from_shape((self.shape[0], self.shape[1], self.shape[2]), &self.data)
                .expect("row-major layout")
                .into_dimensionality::<Ix3>()
                .expect("three axes"),
        )
    }

    pub fn view3_mut(&mut self) -> Result<ArrayViewMut3<'_, T>> {
        if self.ndim() != 3 {
            return Err(Error::Dimension(format!(
                "expected a [batch, time, features] tensor, got {:?}",
                self.shape
            )));
        }
        let (a, b, c) = (self.shape[0], self.shape[1], self.shape[2]);
        Ok(ArrayViewMut3::from_shape((a, b, c), &mut self.data).expect("row-major layout"))
    }

    pub fn view2(&self) -> Result<ArrayView2<'_, T>> {
        if self.ndim() != 2 {
            return Err(Error::Dimension(format!(
                "expected a [batch, features] tensor, got {:?}",
                self.shape
            )));
        }
        Ok(ArrayView2::from_shape((self.shape[0], self.shape[1]), &self.data)
            .expect("row-major layout")
            .into_dimensionality::<Ix2>()
            .expect("two axes"))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn cast<U: Real>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| U::lit(v.to_f64_lossy())).collect(),
        }
    }
}
