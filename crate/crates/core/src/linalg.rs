//! Small dense linear-algebra kernels over [`Real`]: Cholesky solves for
//! regularized normal equations and a cyclic Jacobi symmetric eigensolver.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<T: Real>(a: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!(
            "cholesky needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let scale = a
        .diag()
        .iter()
        .fold(T::zero(), |m, &v| m.max(v.abs()))
        .max(T::min_positive_value());
    let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1));
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > tiny) {
            return Err(Error::Numerical(format!(
                "matrix is not positive definite (pivot {j} = {d})"
            )));
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Ok(l)
}

/// Solves `A X = B` for symmetric positive definite `A`.
pub fn solve_spd<T: Real>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let l = cholesky(a)?;
    let n = l.nrows();
    if b.nrows() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, expected {n}",
            b.nrows()
        )));
    }
    let mut x = b.to_owned();
    for mut col in x.axis_iter_mut(Axis(1)) {
        // forward: L y = b
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s -= l[[i, k]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in i + 1..n {
                s -= l[[k, i]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
    }
    Ok(x)
}

/// Ridge-regularized least squares `argmin ‖Z β − Y‖² + ridge Σ_{j penalized} β_j²`,
/// one solution column per target column. Columns listed in `unpenalized`
/// (typically the intercept) carry no penalty.
pub fn ridge_least_squares<T: Real>(
    design: ArrayView2<'_, T>,
    targets: ArrayView2<'_, T>,
    ridge: T,
    unpenalized: &[usize],
) -> Result<Array2<T>> {
    if design.nrows() != targets.nrows() {
        return Err(Error::Dimension(format!(
            "design has {} rows but targets have {}",
            design.nrows(),
            targets.nrows()
        )));
    }
    if ridge < T::zero() || !ridge.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ridge must be finite and nonnegative, got {ridge}"
        )));
    }
    let mut gram = design.t().dot(&design);
    for j in 0..gram.nrows() {
        if !unpenalized.contains(&j) {
            gram[[j, j]] += ridge;
        }
    }
    let rhs = design.t().dot(&targets);
    solve_spd(gram.view(), rhs.view())
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted nonincreasing and the matching unit eigenvectors
/// as columns.
pub fn symmetric_eigen<T: Real>(a: ArrayView2<'_, T>) -> Result<(Array1<T>, Array2<T>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut m = a.to_owned();
    // symmetrize against rounding in the caller
    for i in 0..n {
        for j in i + 1..n {
            let s = (m[[i, j]] + m[[j, i]]) * T::lit(0.5);
            m[[i, j]] = s;
            m[[j, i]] = s;
        }
    }
    let mut v = Array2::<T>::eye(n);
    let total: T = m.iter().map(|&x| x * x).sum::<T>().sqrt();
    let tol = T::epsilon() * total.max(T::min_positive_value());

    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                m[[p, q]] = T::zero();
                m[[q, p]] = T::zero();
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap_or(std::cmp::Ordering::Equal));
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let vectors = v.select(Axis(1), &order);
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("eigensolver produced non-finite values".into()));
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn solves_small_spd_system() {
        let a = array![[4.0f64, 1.0], [1.0, 3.0]];
        let b = array![[1.0], [2.0]];
        let x = solve_spd(a.view(), b.view()).unwrap();
        // exact: (1/11, 7/11)
        assert!((x[[0, 0]] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[[1, 0]] - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(cholesky(a.view()), Err(Error::Numerical(_))));
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let a = array![[2.0f64, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let (vals, vecs) = symmetric_eigen(a.view()).unwrap();
        assert!((vals[0] - 5.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        assert!((vals[2] - 1.0).abs() < 1e-12);
        let recon = vecs.dot(&Array2::from_diag(&vals)).dot(&vecs.t());
        for (x, y) in recon.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        let gram = vecs.t().dot(&vecs);
        for ((i, j), g) in gram.indexed_iter() {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn ridge_leaves_unpenalized_column_free() {
        // y = 3 for all rows; intercept column unpenalized, slope penalized heavily
        let z = array![[1.0f64, -1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = array![[3.0], [3.0], [3.0]];
        let beta = ridge_least_squares(z.view(), y.view(), 1e6, &[0]).unwrap();
        assert!((beta[[0, 0]] - 3.0).abs() < 1e-12);
        assert!(beta[[1, 0]].abs() < 1e-12);
    }
}
