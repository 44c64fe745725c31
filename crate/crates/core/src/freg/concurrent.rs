use ndarray::{Array1, Array2};

use super::{check_functional_pair, FunctionalPredictor};
use crate::error::{Error, Result};
use crate::fcurve::{FunctionalDataset, FunctionalSample};
use crate::scalar::Real;

/// Concurrent linear model `Y(t) = α(t) + β(t) X(t)`, fit independently at
/// each grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrentModel<T> {
    pub alpha: FunctionalSample<T>,
    pub beta: FunctionalSample<T>,
}

pub fn fit_concurrent<T: Real>(x: &FunctionalDataset<T>, y: &FunctionalDataset<T>) -> Result<ConcurrentModel<T>> {
    check_functional_pair(x, y)?;
    if x.grid() != y.grid() {
        return Err(Error::Dimension(
            "concurrent model needs predictor and response on one grid".into(),
        ));
    }
    let n = x.n();
    let nf = T::from_usize_lossy(n);
    let t_len = x.grid_len();
    let mut alpha = Array1::<T>::zeros(t_len);
    let mut beta = Array1::<T>::zeros(t_len);
    for j in 0..t_len {
        let xc = x.curves().column(j);
        let yc = y.curves().column(j);
        let xm = xc.sum() / nf;
        let ym = yc.sum() / nf;
        let mut sxx = T::zero();
        let mut sxy = T::zero();
        let mut scale = T::zero();
        for (&a, &b) in xc.iter().zip(yc.iter()) {
            sxx += (a - xm) * (a - xm);
            sxy += (a - xm) * (b - ym);
            scale += a * a;
        }
        if !(sxx > scale * T::epsilon() * nf) {
            return Err(Error::SingularDesign { index: j });
        }
        let b = sxy / sxx;
        beta[j] = b;
        alpha[j] = ym - b * xm;
    }
    Ok(ConcurrentModel {
        alpha: FunctionalSample::from_array(alpha)?,
        beta: FunctionalSample::from_array(beta)?,
    })
}

impl<T: Real> FunctionalPredictor<T> for ConcurrentModel<T> {
    fn predict(&self, x: &FunctionalDataset<T>) -> Result<Array2<T>> {
        x.grid().check_len(self.beta.len())?;
        Ok(x.curves() * &self.beta.values() + self.alpha.values())
    }
}
