use ndarray::{Array1, Array2, ArrayView1};

use super::{check_scalar_pair, ScalarPredictor};
use crate::error::{Error, Result};
use crate::fcurve::{l2_distance_view, FunctionalDataset, Grid, ResponseKind, ScalarResponses};
use crate::scalar::Real;

/// Number of candidate bandwidths scanned by leave-one-out cross-validation.
pub const BANDWIDTH_GRID_SIZE: usize = 20;

/// Gaussian kernel `exp(-u²/2)`.
pub fn gaussian_kernel<T: Real>(u: T) -> T {
    (-(u * u) * T::lit(0.5)).exp()
}

/// Nadaraya-Watson regression on curves with the functional L2 distance.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelNpModel<T> {
    grid: Grid<T>,
    curves: Array2<T>,
    responses: Array1<T>,
    pub bandwidth: T,
    /// Candidate bandwidths and their leave-one-out MSE, when chosen by CV.
    pub cv_curve: Vec<(T, T)>,
}

/// Kernel-weighted mean of `y` given distances `d` and bandwidth `h`.
///
/// Weights are shifted by the smallest distance before exponentiating; the
/// shift cancels in the ratio, and it keeps the nearest neighbour's weight at 1
/// so that tiny bandwidths degrade to nearest-neighbour prediction instead of
/// 0/0. Returns `None` if no distance is available.
fn weighted_mean<T: Real>(d: impl Iterator<Item = (T, T)> + Clone, h: T) -> Option<T> {
    let dmin = d.clone().map(|(dist, _)| dist).fold(T::infinity(), T::min);
    if !dmin.is_finite() {
        return None;
    }
    let umin = dmin / h;
    let (num, den) = d.fold((T::zero(), T::zero()), |(num, den), (dist, y)| {
        let u = dist / h;
        let w = (-(u * u - umin * umin) * T::lit(0.5)).exp();
        (num + w * y, den + w)
    });
    Some(num / den)
}

fn median<T: Real>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) * T::lit(0.5)
    }
}

/// Fits the estimator, choosing `h` by leave-one-out cross-validation over
/// [`BANDWIDTH_GRID_SIZE`] log-spaced values in `[0.1·m, 10·m]`, where `m` is
/// the median pairwise distance between training curves.
pub fn fit_kernel_np<T: Real>(x: &FunctionalDataset<T>, y: &ScalarResponses<T>) -> Result<KernelNpModel<T>> {
    check_scalar_pair(x, y, ResponseKind::Continuous)?;
    let n = x.n();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "kernel regression needs at least 2 curves, got {n}"
        )));
    }
    let dist = pairwise_distances(x)?;
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            upper.push(dist[[i, j]]);
        }
    }
    if upper.iter().all(|&d| d == T::zero()) {
        return Err(Error::Degenerate(
            "all training curves are identical (zero pairwise distance)".into(),
        ));
    }
    let mut m = median(upper.clone());
    if m == T::zero() {
        m = median(upper.into_iter().filter(|&d| d > T::zero()).collect());
    }

    let yv = y.values();
    let lo = (m * T::lit(0.1)).ln();
    let hi = (m * T::lit(10.0)).ln();
    let steps = T::from_usize_lossy(BANDWIDTH_GRID_SIZE - 1);
    let mut cv_curve = Vec::with_capacity(BANDWIDTH_GRID_SIZE);
    let mut best: Option<(T, T)> = None;
    for b in 0..BANDWIDTH_GRID_SIZE {
        let h = (lo + (hi - lo) * T::from_usize_lossy(b) / steps).exp();
        let mut sse = T::zero();
        for i in 0..n {
            let row = dist.row(i);
            let others = row
                .iter()
                .zip(yv.iter())
                .enumerate()
                .filter(move |(j, _)| *j != i)
                .map(|(_, (&d, &yy))| (d, yy));
            let pred = weighted_mean(others, h).expect("n >= 2 leaves a neighbour");
            let e = pred - yv[i];
            sse += e * e;
        }
        let mse = sse / T::from_usize_lossy(n);
        cv_curve.push((h, mse));
        // strict comparison: ties keep the smaller bandwidth
        if best.is_none_or(|(_, b)| mse < b) {
            best = Some((h, mse));
        }
    }
    let (bandwidth, _) = best.expect("bandwidth grid is nonempty");
    Ok(KernelNpModel {
        grid: x.grid().clone(),
        curves: x.curves().clone(),
        responses: yv.to_owned(),
        bandwidth,
        cv_curve,
    })
}

fn pairwise_distances<T: Real>(x: &FunctionalDataset<T>) -> Result<Array2<T>> {
    let n = x.n();
    let mut d = Array2::<T>::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let v = l2_distance_view(x.curve(i), x.curve(j), x.grid())?;
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    Ok(d)
}

impl<T: Real> KernelNpModel<T> {
    /// Builds the estimator with a fixed bandwidth (no cross-validation).
    pub fn with_bandwidth(x: &FunctionalDataset<T>, y: &ScalarResponses<T>, bandwidth: T) -> Result<Self> {
        check_scalar_pair(x, y, ResponseKind::Continuous)?;
        if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(Self {
            grid: x.grid().clone(),
            curves: x.curves().clone(),
            responses: y.values().to_owned(),
            bandwidth,
            cv_curve: Vec::new(),
        })
    }

    pub fn predict_one(&self, curve: ArrayView1<'_, T>) -> Result<T> {
        let mut dists = Vec::with_capacity(self.curves.nrows());
        for row in self.curves.rows() {
            dists.push(l2_distance_view(curve, row, &self.grid)?);
        }
        let pairs = dists.iter().copied().zip(self.responses.iter().copied());
        let pred =
            weighted_mean(pairs, self.bandwidth).ok_or_else(|| Error::EmptyInput("no training curves".into()))?;
        // a convex combination, up to rounding
        let (lo, hi) = self
            .responses
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
        Ok(pred.max(lo).min(hi))
    }
}

impl<T: Real> ScalarPredictor<T> for KernelNpModel<T> {
    fn predict(&self, x: &FunctionalDataset<T>) -> Result<Array1<T>> {
        x.grid().check_len(self.grid.len())?;
        x.curves()
            .rows()
            .into_iter()
            .map(|row| self.predict_one(row))
            .collect::<Result<Vec<_>>>()
            .map(Array1::from)
    }
}
