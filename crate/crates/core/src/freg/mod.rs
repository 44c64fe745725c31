//! Classical functional regression estimators.
//!
//! Scalar-on-function: [`FlmBasisModel`] (Fourier-basis linear model),
//! [`FpcaModel`] (principal-component regression), [`LogisticFlmModel`]
//! (binary response with expit link) and [`KernelNpModel`] (Nadaraya-Watson
//! with functional L2 distance). Function-on-function: [`ConcurrentModel`]
//! (pointwise linear) and [`FfLinearModel`] (bivariate kernel in a tensor
//! Fourier basis).

mod concurrent;
mod fflinear;
mod flm;
mod fpca;
mod kernel;
mod logistic;

pub use concurrent::{fit_concurrent, ConcurrentModel};
pub use fflinear::{fit_ff_linear, FfLinearModel};
pub use flm::{fit_flm_basis, FlmBasisModel};
pub use fpca::{fit_flm_fpca, FpcaModel};
pub use kernel::{fit_kernel_np, gaussian_kernel, KernelNpModel, BANDWIDTH_GRID_SIZE};
pub use logistic::{fit_logistic_flm, IrlsReport, LogisticFlmModel};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::fcurve::{FunctionalDataset, ResponseKind, ScalarResponses};
use crate::scalar::Real;

/// Default number of Fourier functions used by scalar-response estimators.
pub const DEFAULT_Q_EST: usize = 9;
/// Default basis sizes for the function-on-function linear model.
pub const DEFAULT_Q_FF: usize = 9;
/// Default fraction of variance explained for principal-component truncation.
pub const DEFAULT_FVE: f64 = 0.99;
/// Default ridge guarding near-singular designs.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// A fitted model mapping curves to one scalar each.
pub trait ScalarPredictor<T: Real> {
    fn predict(&self, x: &FunctionalDataset<T>) -> Result<Array1<T>>;
}

/// A fitted model mapping curves to curves; rows of the output are samples.
pub trait FunctionalPredictor<T: Real> {
    fn predict(&self, x: &FunctionalDataset<T>) -> Result<Array2<T>>;
}

fn check_scalar_pair<T: Real>(x: &FunctionalDataset<T>, y: &ScalarResponses<T>, kind: ResponseKind) -> Result<()> {
    if x.n() != y.len() {
        return Err(Error::Dimension(format!("{} curves but {} responses", x.n(), y.len())));
    }
    if y.kind() != kind {
        return Err(Error::InvalidArgument(format!(
            "expected {kind:?} responses, got {:?}",
            y.kind()
        )));
    }
    Ok(())
}

fn check_functional_pair<T: Real>(x: &FunctionalDataset<T>, y: &FunctionalDataset<T>) -> Result<()> {
    if x.n() != y.n() {
        return Err(Error::Dimension(format!(
            "{} predictor curves but {} response curves",
            x.n(),
            y.n()
        )));
    }
    Ok(())
}

/// `[1 | m]`: prepends an intercept column.
fn with_intercept<T: Real>(m: &Array2<T>) -> Array2<T> {
    let (n, p) = m.dim();
    let mut z = Array2::<T>::ones((n, p + 1));
    z.slice_mut(ndarray::s![.., 1..]).assign(m);
    z
}
