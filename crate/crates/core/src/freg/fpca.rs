use ndarray::{s, Array1, Array2, Axis};

use super::{check_scalar_pair, with_intercept, ScalarPredictor};
use crate::error::{Error, Result};
use crate::fcurve::{mean_curve, FunctionalDataset, FunctionalSample, ResponseKind, ScalarResponses};
use crate::linalg;
use crate::scalar::Real;

/// Functional principal-component regression.
///
/// Eigenfunctions are orthonormal under the grid's trapezoid quadrature, and
/// scores are quadrature inner products of centred curves with them.
#[derive(Clone, Debug, PartialEq)]
pub struct FpcaModel<T> {
    pub mean: FunctionalSample<T>,
    /// `K × T`, one eigenfunction per row.
    pub eigenfunctions: Array2<T>,
    /// All nonnegative eigenvalues of the covariance operator, nonincreasing.
    pub eigenvalues: Array1<T>,
    pub score_coefficients: Array1<T>,
    pub intercept: T,
    pub fve_threshold: T,
    weights: Array1<T>,
}

/// Relative slack when comparing cumulative variance to the threshold, so that
/// `fve = 1` stops at the numerical rank instead of chasing rounding noise.
const FVE_SLACK: f64 = 1e-10;

pub fn fit_flm_fpca<T: Real>(x: &FunctionalDataset<T>, y: &ScalarResponses<T>, fve: T) -> Result<FpcaModel<T>> {
    check_scalar_pair(x, y, ResponseKind::Continuous)?;
    let n = x.n();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "principal components need at least 2 curves, got {n}"
        )));
    }
    if !(fve > T::zero() && fve <= T::one()) {
        return Err(Error::InvalidArgument(format!("fve must lie in (0, 1], got {fve}")));
    }
    let mean = mean_curve(x)?;
    let centred = x.curves() - &mean.values();
    let weights = x.grid().weights().to_owned();
    let sqrt_w = weights.mapv(|w| w.sqrt());

    // W^{1/2} C W^{1/2}, with C the sample covariance on the grid
    let scaled = &centred * &sqrt_w;
    let cov = scaled.t().dot(&scaled) / T::from_usize_lossy(n - 1);
    let (vals, vecs) = linalg::symmetric_eigen(cov.view())?;
    let vals = vals.mapv(|v| v.max(T::zero()));
    let total: T = vals.sum();

    let max_rank = (n - 1).min(x.grid_len());
    let k = if total <= T::zero() {
        0
    } else {
        let target = fve * total - T::lit(FVE_SLACK) * total;
        let mut cum = T::zero();
        let mut k = 0;
        while k < max_rank {
            cum += vals[k];
            k += 1;
            if cum >= target {
                break;
            }
        }
        k
    };

    // eigenfunction = u / sqrt(w), so that Σ_j w_j ξ_j² = 1
    let u = vecs.slice(s![.., ..k]).to_owned();
    let eigenfunctions = (&u.t() / &sqrt_w).to_owned();
    let scores = scaled.dot(&u);

    let z = with_intercept(&scores);
    let target = y.values().to_owned().insert_axis(Axis(1));
    let theta = linalg::ridge_least_squares(z.view(), target.view(), T::zero(), &[0])?;

    Ok(FpcaModel {
        mean,
        eigenfunctions,
        eigenvalues: vals,
        score_coefficients: theta.slice(s![1.., 0]).to_owned(),
        intercept: theta[[0, 0]],
        fve_threshold: fve,
        weights,
    })
}

impl<T: Real> FpcaModel<T> {
    pub fn n_components(&self) -> usize {
        self.eigenfunctions.nrows()
    }

    /// Principal-component scores of new curves.
    pub fn scores(&self, x: &FunctionalDataset<T>) -> Result<Array2<T>> {
        if x.grid_len() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "model was fit on {} grid points, got {}",
                self.weights.len(),
                x.grid_len()
            )));
        }
        let centred = x.curves() - &self.mean.values();
        let weighted = &centred * &self.weights;
        Ok(weighted.dot(&self.eigenfunctions.t()))
    }
}

impl<T: Real> ScalarPredictor<T> for FpcaModel<T> {
    fn predict(&self, x: &FunctionalDataset<T>) -> Result<Array1<T>> {
        let s = self.scores(x)?;
        Ok(s.dot(&self.score_coefficients).mapv(|v| v + self.intercept))
    }
}
