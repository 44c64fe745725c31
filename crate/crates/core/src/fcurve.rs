//! Functional-data value types: grids on `[0, 1]`, sampled curves, datasets of
//! curves on a shared grid, scalar responses, and trapezoidal quadrature.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Strictly increasing sample points in `[0, 1]`, with cached trapezoid weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    points: Array1<T>,
    weights: Array1<T>,
}

impl<T: Real> Grid<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (j, &p) in points.iter().enumerate() {
            if !p.is_finite() || p < T::zero() || p > T::one() {
                return Err(Error::InvalidArgument(format!(
                    "grid point {j} = {p} lies outside [0, 1]"
                )));
            }
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("grid points must be strictly increasing".into()));
        }
        let weights = trapezoid_weights(&points);
        Ok(Self {
            points: Array1::from(points),
            weights,
        })
    }

    /// `n` equally spaced points from 0 to 1 inclusive.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {n}")));
        }
        let step = T::one() / T::from_usize_lossy(n - 1);
        let mut pts: Vec<T> = (0..n).map(|j| T::from_usize_lossy(j) * step).collect();
        // Pin the right endpoint so rounding never pushes it past 1.
        pts[n - 1] = T::one();
        Self::new(pts)
    }

    /// Maps raw, strictly increasing abscissae (e.g. wavelengths) affinely onto `[0, 1]`.
    pub fn rescaled(raw: &[T]) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points, got {}",
                raw.len()
            )));
        }
        let lo = raw[0];
        let hi = raw[raw.len() - 1];
        if !(hi > lo) {
            return Err(Error::InvalidArgument(
                "raw abscissae must be strictly increasing".into(),
            ));
        }
        let mut pts: Vec<T> = raw.iter().map(|&x| (x - lo) / (hi - lo)).collect();
        let last = pts.len() - 1;
        pts[0] = T::zero();
        pts[last] = T::one();
        Self::new(pts)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> ArrayView1<'_, T> {
        self.points.view()
    }

    /// Composite trapezoid weights: `∫ f ≈ Σ w_j f(t_j)`.
    pub fn weights(&self) -> ArrayView1<'_, T> {
        self.weights.view()
    }

    /// Trapezoidal integral of values sampled on this grid.
    pub fn integrate(&self, values: ArrayView1<'_, T>) -> Result<T> {
        self.check_len(values.len())?;
        Ok(self.weights.dot(&values))
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Dimension(format!(
                "curve has {len} values but grid has {} points",
                self.len()
            )));
        }
        Ok(())
    }
}

fn trapezoid_weights<T: Real>(points: &[T]) -> Array1<T> {
    let half = T::lit(0.5);
    let mut w = Array1::zeros(points.len());
    for j in 0..points.len() - 1 {
        let h = points[j + 1] - points[j];
        w[j] += half * h;
        w[j + 1] += half * h;
    }
    w
}

/// One curve sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalSample<T> {
    values: Array1<T>,
}

impl<T: Real> FunctionalSample<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        Self::from_array(Array1::from(values))
    }

    pub fn from_array(values: Array1<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("functional sample".into()));
        }
        Ok(Self { values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::from_array(grid.points().mapv(f))
    }

    pub fn constant(grid: &Grid<T>, c: T) -> Self {
        Self {
            values: Array1::from_elem(grid.len(), c),
        }
    }

    pub fn values(&self) -> ArrayView1<'_, T> {
        self.values.view()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_array(self) -> Array1<T> {
        self.values
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            values: self.values.mapv(|v| v * a),
        }
    }
}

/// `n` curves observed on a shared grid; rows are samples.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalDataset<T> {
    grid: Grid<T>,
    curves: Array2<T>,
}

impl<T: Real> FunctionalDataset<T> {
    pub fn new(grid: Grid<T>, curves: Array2<T>) -> Result<Self> {
        if curves.nrows() == 0 {
            return Err(Error::EmptyInput("dataset has no curves".into()));
        }
        if curves.ncols() != grid.len() {
            return Err(Error::Dimension(format!(
                "dataset has {} columns but grid has {} points",
                curves.ncols(),
                grid.len()
            )));
        }
        if let Some(((i, j), _)) = curves.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("dataset entry ({i}, {j})")));
        }
        Ok(Self { grid, curves })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn curves(&self) -> &Array2<T> {
        &self.curves
    }

    pub fn n(&self) -> usize {
        self.curves.nrows()
    }

    pub fn grid_len(&self) -> usize {
        self.curves.ncols()
    }

    pub fn curve(&self, i: usize) -> ArrayView1<'_, T> {
        self.curves.row(i)
    }

    /// New dataset holding the given rows, in order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        Self::new(self.grid.clone(), self.curves.select(Axis(0), rows))
    }

    pub fn into_parts(self) -> (Grid<T>, Array2<T>) {
        (self.grid, self.curves)
    }
}

/// Whether a scalar response is real-valued or a 0/1 label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResponseKind {
    Continuous,
    Binary,
}

/// One scalar response per curve.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarResponses<T> {
    values: Array1<T>,
    kind: ResponseKind,
}

impl<T: Real> ScalarResponses<T> {
    pub fn continuous(values: Vec<T>) -> Result<Self> {
        Self::new(Array1::from(values), ResponseKind::Continuous)
    }

    pub fn binary(values: Vec<T>) -> Result<Self> {
        Self::new(Array1::from(values), ResponseKind::Binary)
    }

    pub fn new(values: Array1<T>, kind: ResponseKind) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar responses".into()));
        }
        if kind == ResponseKind::Binary && values.iter().any(|&v| v != T::zero() && v != T::one()) {
            return Err(Error::InvalidArgument("binary responses must be 0 or 1".into()));
        }
        Ok(Self { values, kind })
    }

    pub fn values(&self) -> ArrayView1<'_, T> {
        self.values.view()
    }

    pub fn kind(&self) -> ResponseKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            values: self.values.select(Axis(0), rows),
            kind: self.kind,
        }
    }
}

/// Trapezoidal approximation of `∫₀¹ f(t) g(t) dt`.
pub fn inner_product<T: Real>(f: &FunctionalSample<T>, g: &FunctionalSample<T>, grid: &Grid<T>) -> Result<T> {
    inner_product_view(f.values(), g.values(), grid)
}

pub(crate) fn inner_product_view<T: Real>(f: ArrayView1<'_, T>, g: ArrayView1<'_, T>, grid: &Grid<T>) -> Result<T> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    Ok(f.iter()
        .zip(g.iter())
        .zip(grid.weights().iter())
        .fold(T::zero(), |acc, ((&a, &b), &w)| acc + w * a * b))
}

/// Functional L2 distance `sqrt(∫ (f - g)²)`.
pub fn l2_distance<T: Real>(f: &FunctionalSample<T>, g: &FunctionalSample<T>, grid: &Grid<T>) -> Result<T> {
    l2_distance_view(f.values(), g.values(), grid)
}

pub(crate) fn l2_distance_view<T: Real>(f: ArrayView1<'_, T>, g: ArrayView1<'_, T>, grid: &Grid<T>) -> Result<T> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    let sq = f
        .iter()
        .zip(g.iter())
        .zip(grid.weights().iter())
        .fold(T::zero(), |acc, ((&a, &b), &w)| {
            let d = a - b;
            acc + w * d * d
        });
    // Weights are nonnegative, so `sq` can only dip below zero by rounding.
    Ok(sq.max(T::zero()).sqrt())
}

/// Pointwise mean over the curves of a dataset.
pub fn mean_curve<T: Real>(ds: &FunctionalDataset<T>) -> Result<FunctionalSample<T>> {
    let mean = ds
        .curves()
        .mean_axis(Axis(0))
        .ok_or_else(|| Error::EmptyInput("mean of an empty dataset".into()))?;
    FunctionalSample::from_array(mean)
}
