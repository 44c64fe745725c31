use ndarray::{s, Array1, Array2, Axis};

use super::{check_scalar_pair, with_intercept, ScalarPredictor};
use crate::basis::{self, BasisSystem};
use crate::error::{Error, Result};
use crate::fcurve::{FunctionalDataset, ResponseKind, ScalarResponses};
use crate::linalg;
use crate::scalar::{expit, Real};

pub const IRLS_MAX_ITER: usize = 100;
pub const IRLS_GRAD_TOL: f64 = 1e-8;

/// Convergence record of an IRLS fit.
#[derive(Clone, Debug, PartialEq)]
pub struct IrlsReport<T> {
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: T,
    /// Penalized negative log-likelihood, starting at the initial point.
    pub objective_trace: Vec<T>,
}

/// Functional logistic regression with the expit link.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticFlmModel<T> {
    pub beta_coeffs: Array1<T>,
    pub intercept: T,
    pub system: BasisSystem,
    pub ridge: T,
    pub report: IrlsReport<T>,
}

/// `log(1 + e^x)` without overflow.
fn softplus<T: Real>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Penalized negative log-likelihood; `theta[0]` is the unpenalized intercept.
fn objective<T: Real>(z: &Array2<T>, y: &Array1<T>, theta: &Array1<T>, ridge: T) -> T {
    let eta = z.dot(theta);
    let nll = eta
        .iter()
        .zip(y.iter())
        .fold(T::zero(), |acc, (&e, &yy)| acc + softplus(e) - yy * e);
    let pen = theta.slice(s![1..]).iter().fold(T::zero(), |a, &b| a + b * b);
    nll + T::lit(0.5) * ridge * pen
}

/// Maximizes the ridge-penalized Bernoulli log-likelihood by Newton steps
/// (iteratively reweighted least squares) with step halving, so the objective
/// never increases.
pub fn fit_logistic_flm<T: Real>(
    x: &FunctionalDataset<T>,
    y: &ScalarResponses<T>,
    q_est: usize,
    ridge: T,
) -> Result<LogisticFlmModel<T>> {
    check_scalar_pair(x, y, ResponseKind::Binary)?;
    let ones = y.values().iter().filter(|&&v| v == T::one()).count();
    if ones == 0 || ones == y.len() {
        return Err(Error::DegenerateLabels("both classes must be present".into()));
    }
    let system = BasisSystem::fourier(q_est)?;
    let coeffs = basis::smooth_fit(x, system, ridge)?;
    let z = with_intercept(coeffs.coeffs());
    let yv = y.values().to_owned();
    let p = z.ncols();

    let mut theta = Array1::<T>::zeros(p);
    let mut obj = objective(&z, &yv, &theta, ridge);
    let mut trace = vec![obj];
    let mut converged = false;
    let mut grad_norm = T::infinity();
    let mut iterations = 0;

    for _ in 0..IRLS_MAX_ITER {
        let prob = z.dot(&theta).mapv(expit);
        let mut grad = z.t().dot(&(&prob - &yv));
        for j in 1..p {
            grad[j] += ridge * theta[j];
        }
        grad_norm = grad.dot(&grad).sqrt();
        if grad_norm <= T::lit(IRLS_GRAD_TOL) {
            converged = true;
            break;
        }
        let w = prob.mapv(|pi| pi * (T::one() - pi));
        let zw = &z * &w.view().insert_axis(Axis(1));
        let mut hess = z.t().dot(&zw);
        for j in 1..p {
            hess[[j, j]] += ridge;
        }
        let step = linalg::solve_spd(hess.view(), grad.view().insert_axis(Axis(1)))?
            .column(0)
            .to_owned();

        let mut scale = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = &theta - &(&step * scale);
            let cand_obj = objective(&z, &yv, &candidate, ridge);
            if cand_obj.is_finite() && cand_obj <= obj {
                theta = candidate;
                obj = cand_obj;
                accepted = true;
                break;
            }
            scale *= T::lit(0.5);
        }
        iterations += 1;
        trace.push(obj);
        if !accepted {
            // no descent along the Newton direction at machine precision
            break;
        }
    }

    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logistic FLM parameters".into()));
    }
    Ok(LogisticFlmModel {
        intercept: theta[0],
        beta_coeffs: theta.slice(s![1..]).to_owned(),
        system,
        ridge,
        report: IrlsReport {
            iterations,
            converged,
            gradient_norm: grad_norm,
            objective_trace: trace,
        },
    })
}

impl<T: Real> LogisticFlmModel<T> {
    /// Linear predictor `intercept + ∫ X β`.
    pub fn linear_predictor(&self, x: &FunctionalDataset<T>) -> Result<Array1<T>> {
        let c = basis::smooth_fit(x, self.system, self.ridge)?.into_coeffs();
        Ok(c.dot(&self.beta_coeffs).mapv(|v| v + self.intercept))
    }
}

impl<T: Real> ScalarPredictor<T> for LogisticFlmModel<T> {
    /// `P(Y = 1 | X)`, kept strictly inside `(0, 1)` even where expit rounds to an endpoint.
    fn predict(&self, x: &FunctionalDataset<T>) -> Result<Array1<T>> {
        let hi = T::one() - T::epsilon() * T::lit(0.5);
        let lo = T::min_positive_value();
        Ok(self.linear_predictor(x)?.mapv(|e| expit(e).max(lo).min(hi)))
    }
}
