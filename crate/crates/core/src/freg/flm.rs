use ndarray::{s, Array1, Array2};

use super::{check_scalar_pair, with_intercept, ScalarPredictor};
use crate::basis::{self, BasisSystem};
use crate::error::{Error, Result};
use crate::fcurve::{FunctionalDataset, ResponseKind, ScalarResponses};
use crate::linalg;
use crate::scalar::Real;

/// Scalar-on-function linear model with `β` expanded in a Fourier basis.
///
/// Curves are smoothed into the same orthonormal basis, so `∫ X β` is the dot
/// product of the two coefficient vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FlmBasisModel<T> {
    pub beta_coeffs: Array1<T>,
    pub intercept: T,
    pub system: BasisSystem,
    pub ridge: T,
}

pub fn fit_flm_basis<T: Real>(
    x: &FunctionalDataset<T>,
    y: &ScalarResponses<T>,
    q_est: usize,
    ridge: T,
) -> Result<FlmBasisModel<T>> {
    check_scalar_pair(x, y, ResponseKind::Continuous)?;
    let system = BasisSystem::fourier(q_est)?;
    if q_est > x.grid_len() {
        return Err(Error::Dimension(format!(
            "q_est = {q_est} exceeds the {} grid points",
            x.grid_len()
        )));
    }
    let coeffs = basis::smooth_fit(x, system, ridge)?;
    let z = with_intercept(coeffs.coeffs());
    let target = y.values().to_owned().insert_axis(ndarray::Axis(1));
    let theta = linalg::ridge_least_squares(z.view(), target.view(), ridge, &[0])?;
    let model = FlmBasisModel {
        intercept: theta[[0, 0]],
        beta_coeffs: theta.slice(s![1.., 0]).to_owned(),
        system,
        ridge,
    };
    if !model.intercept.is_finite() || model.beta_coeffs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("basis FLM parameters".into()));
    }
    Ok(model)
}

impl<T: Real> FlmBasisModel<T> {
    /// Coefficients of new curves in the model's basis.
    pub fn represent(&self, x: &FunctionalDataset<T>) -> Result<Array2<T>> {
        Ok(basis::smooth_fit(x, self.system, self.ridge)?.into_coeffs())
    }

    /// `β(t)` evaluated on a grid.
    pub fn beta_curve(&self, grid: &crate::fcurve::Grid<T>) -> Array1<T> {
        basis::reconstruct_one(&self.beta_coeffs, self.system, grid)
    }
}

impl<T: Real> ScalarPredictor<T> for FlmBasisModel<T> {
    fn predict(&self, x: &FunctionalDataset<T>) -> Result<Array1<T>> {
        let c = self.represent(x)?;
        Ok(c.dot(&self.beta_coeffs).mapv(|v| v + self.intercept))
    }
}
