//! Fourier basis systems and least-squares smoothing of sampled curves into
//! coefficient representations.
//!
//! The Fourier system of size `q` is the ordered list
//! `φ₁(t) = 1, φ₂ₖ(t) = √2 sin(2πkt), φ₂ₖ₊₁(t) = √2 cos(2πkt)`, which is
//! orthonormal on `[0, 1]`. With this convention `∫ X β` reduces to the dot
//! product of coefficient vectors.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::fcurve::{FunctionalDataset, Grid};
use crate::linalg;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Fourier,
}

/// A basis family together with the number of functions used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisSystem {
    kind: BasisKind,
    size: usize,
}

impl BasisSystem {
    pub fn fourier(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("basis needs at least one function".into()));
        }
        Ok(Self {
            kind: BasisKind::Fourier,
            size,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Value of the `index`-th basis function (1-based) at `t`.
    pub fn eval<T: Real>(&self, index: usize, t: T) -> T {
        match self.kind {
            BasisKind::Fourier => fourier(index, t),
        }
    }
}

/// The `m`-th Fourier function (1-based) at `t`.
pub fn fourier<T: Real>(m: usize, t: T) -> T {
    assert!(m >= 1, "Fourier functions are indexed from 1");
    if m == 1 {
        return T::one();
    }
    let k = T::from_usize_lossy(m / 2);
    let arg = T::TAU() * k * t;
    if m.is_multiple_of(2) {
        T::SQRT_2() * arg.sin()
    } else {
        T::SQRT_2() * arg.cos()
    }
}

/// `T × q` matrix with entry `(j, k) = φ_k(t_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisMatrix<T> {
    values: Array2<T>,
    system: BasisSystem,
}

impl<T: Real> BasisMatrix<T> {
    pub fn values(&self) -> ArrayView2<'_, T> {
        self.values.view()
    }

    pub fn system(&self) -> BasisSystem {
        self.system
    }

    pub fn into_array(self) -> Array2<T> {
        self.values
    }
}

pub fn evaluate_basis<T: Real>(system: BasisSystem, grid: &Grid<T>) -> BasisMatrix<T> {
    let pts = grid.points();
    let values = Array2::from_shape_fn((grid.len(), system.size()), |(j, k)| system.eval(k + 1, pts[j]));
    BasisMatrix { values, system }
}

/// Basis coefficients for a set of curves, one row per curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientRepr<T> {
    coeffs: Array2<T>,
    system: BasisSystem,
}

impl<T: Real> CoefficientRepr<T> {
    pub fn new(coeffs: Array2<T>, system: BasisSystem) -> Result<Self> {
        if coeffs.ncols() != system.size() {
            return Err(Error::Dimension(format!(
                "{} coefficient columns for a basis of size {}",
                coeffs.ncols(),
                system.size()
            )));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("basis coefficients".into()));
        }
        Ok(Self { coeffs, system })
    }

    pub fn coeffs(&self) -> &Array2<T> {
        &self.coeffs
    }

    pub fn system(&self) -> BasisSystem {
        self.system
    }

    pub fn into_coeffs(self) -> Array2<T> {
        self.coeffs
    }
}

/// Per-curve ridge least squares of the observations on the basis matrix.
pub fn smooth_fit<T: Real>(ds: &FunctionalDataset<T>, system: BasisSystem, ridge: T) -> Result<CoefficientRepr<T>> {
    let phi = evaluate_basis(system, ds.grid());
    let coeffs = smooth_coefficients(phi.values(), ds.curves().view(), ridge)?;
    CoefficientRepr::new(coeffs, system)
}

/// Coefficients `Θ (n × q)` minimizing `‖Y − Θ Φᵀ‖² + ridge ‖Θ‖²` row by row.
pub(crate) fn smooth_coefficients<T: Real>(
    phi: ArrayView2<'_, T>,
    curves: ArrayView2<'_, T>,
    ridge: T,
) -> Result<Array2<T>> {
    let (t_len, q) = phi.dim();
    if curves.ncols() != t_len {
        return Err(Error::Dimension(format!(
            "curves have {} points, basis matrix has {t_len} rows",
            curves.ncols()
        )));
    }
    if ridge < T::zero() || !ridge.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ridge must be finite and nonnegative, got {ridge}"
        )));
    }
    if q > t_len && ridge == T::zero() {
        return Err(Error::IllPosed(format!(
            "{q} basis functions cannot be fit to {t_len} points without a ridge penalty"
        )));
    }
    let mut gram = phi.t().dot(&phi);
    for k in 0..q {
        gram[[k, k]] += ridge;
    }
    let rhs = phi.t().dot(&curves.t());
    let sol = linalg::solve_spd(gram.view(), rhs.view())?;
    Ok(sol.reversed_axes())
}

/// Evaluates coefficient rows on a grid: `curves = coeffs · Φᵀ`.
pub fn reconstruct<T: Real>(repr: &CoefficientRepr<T>, grid: &Grid<T>) -> Result<FunctionalDataset<T>> {
    let phi = evaluate_basis(repr.system(), grid);
    FunctionalDataset::new(grid.clone(), repr.coeffs().dot(&phi.values().t()))
}

/// Evaluates one coefficient vector as a curve on the grid.
pub fn reconstruct_one<T: Real>(coeffs: &Array1<T>, system: BasisSystem, grid: &Grid<T>) -> Array1<T> {
    evaluate_basis(system, grid).values().dot(coeffs)
}
