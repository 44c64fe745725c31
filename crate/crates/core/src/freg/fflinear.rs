use ndarray::{s, Array1, Array2};

use super::{check_functional_pair, with_intercept, FunctionalPredictor};
use crate::basis::{self, BasisSystem};
use crate::error::{Error, Result};
use crate::fcurve::{FunctionalDataset, Grid};
use crate::linalg;
use crate::scalar::Real;

/// Non-concurrent linear model `Y(t) = α(t) + ∫ β(t, s) X(s) ds` with
/// `β(t, s) = Σ_{j,k} B_{jk} φ_j(t) φ_k(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FfLinearModel<T> {
    /// `q_t × q_s`.
    pub b: Array2<T>,
    pub alpha_coeffs: Array1<T>,
    pub system_s: BasisSystem,
    pub system_t: BasisSystem,
    pub ridge: T,
    response_grid: Grid<T>,
}

pub fn fit_ff_linear<T: Real>(
    x: &FunctionalDataset<T>,
    y: &FunctionalDataset<T>,
    q_s: usize,
    q_t: usize,
    ridge: T,
) -> Result<FfLinearModel<T>> {
    check_functional_pair(x, y)?;
    if q_s > x.grid_len() || q_t > y.grid_len() {
        return Err(Error::Dimension(format!(
            "basis sizes ({q_s}, {q_t}) exceed grid lengths ({}, {})",
            x.grid_len(),
            y.grid_len()
        )));
    }
    let system_s = BasisSystem::fourier(q_s)?;
    let system_t = BasisSystem::fourier(q_t)?;
    let xc = basis::smooth_fit(x, system_s, ridge)?;
    let yc = basis::smooth_fit(y, system_t, ridge)?;
    let z = with_intercept(xc.coeffs());
    // (q_s + 1) × q_t: one ridge regression per response coefficient
    let theta = linalg::ridge_least_squares(z.view(), yc.coeffs().view(), ridge, &[0])?;
    let model = FfLinearModel {
        alpha_coeffs: theta.row(0).to_owned(),
        b: theta.slice(s![1.., ..]).t().to_owned(),
        system_s,
        system_t,
        ridge,
        response_grid: y.grid().clone(),
    };
    if model.b.iter().chain(model.alpha_coeffs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("FF-linear parameters".into()));
    }
    Ok(model)
}

impl<T: Real> FfLinearModel<T> {
    /// Response coefficients in the `t`-basis for new predictor curves.
    pub fn predict_coeffs(&self, x: &FunctionalDataset<T>) -> Result<Array2<T>> {
        let xc = basis::smooth_fit(x, self.system_s, self.ridge)?;
        Ok(xc.coeffs().dot(&self.b.t()) + &self.alpha_coeffs)
    }

    pub fn response_grid(&self) -> &Grid<T> {
        &self.response_grid
    }
}

impl<T: Real> FunctionalPredictor<T> for FfLinearModel<T> {
    fn predict(&self, x: &FunctionalDataset<T>) -> Result<Array2<T>> {
        let coeffs = self.predict_coeffs(x)?;
        let phi = basis::evaluate_basis(self.system_t, &self.response_grid);
        Ok(coeffs.dot(&phi.values().t()))
    }
}
