//! Small dense symmetric routines used by the Rayleigh–Ritz step and tests.

use ndarray::Array2;

use crate::error::{Result, VbiError};
use crate::scalar::Real;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as columns.
pub fn symmetric_eigen<T: Real>(a: &Array2<T>) -> Result<(Vec<T>, Array2<T>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(VbiError::DimensionMismatch {
            context: "symmetric_eigen",
            expected: n,
            found: a.ncols(),
        });
    }
    let mut a = a.clone();
    let mut v = Array2::<T>::eye(n);
    let scale = a.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if scale == T::zero() {
        return Ok((vec![T::zero(); n], v));
    }
    let tol = T::epsilon() * scale;
    let max_sweeps = 100;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off.sqrt() <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(VbiError::EigenNoConvergence {
            iterations: max_sweeps,
            residual: f64::NAN,
            condition: f64::NAN,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].partial_cmp(&a[[j, j]]).unwrap());
    let values = order.iter().map(|&i| a[[i, i]]).collect();
    let mut vecs = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        vecs.column_mut(col).assign(&v.column(i));
    }
    Ok((values, vecs))
}

/// Dense Cholesky factor `A = L Lᵀ` (lower triangle returned).
pub fn cholesky<T: Real>(a: &Array2<T>) -> Result<Array2<T>> {
    let n = a.nrows();
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > T::zero()) {
            return Err(VbiError::NotPositiveDefinite {
                pivot: j,
                value: d.as_f64(),
            });
        }
        let djj = d.sqrt();
        l[[j, j]] = djj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `K x = λ M x` for symmetric `K` and SPD `M`.
///
/// Eigenvectors are returned as `M`-orthonormal columns, eigenvalues ascending.
pub fn generalized_eigen<T: Real>(k: &Array2<T>, m: &Array2<T>) -> Result<(Vec<T>, Array2<T>)> {
    let n = k.nrows();
    let l = cholesky(m)?;
    // C = L⁻¹ K L⁻ᵀ, built column by column.
    let mut tmp = Array2::<T>::zeros((n, n));
    for col in 0..n {
        let y = forward(&l, k.column(col).iter().copied());
        tmp.column_mut(col).assign(&ndarray::Array1::from(y));
    }
    let mut c = Array2::<T>::zeros((n, n));
    for row in 0..n {
        let y = forward(&l, tmp.row(row).iter().copied());
        for (j, v) in y.into_iter().enumerate() {
            c[[row, j]] = v;
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = (c[[i, j]] + c[[j, i]]) * T::lit(0.5);
            c[[i, j]] = s;
            c[[j, i]] = s;
        }
    }
    let (values, y) = symmetric_eigen(&c)?;
    let mut x = Array2::<T>::zeros((n, n));
    for col in 0..n {
        let v = backward(&l, y.column(col).iter().copied().collect());
        x.column_mut(col).assign(&ndarray::Array1::from(v));
    }
    Ok((values, x))
}

fn forward<T: Real>(l: &Array2<T>, b: impl Iterator<Item = T>) -> Vec<T> {
    let mut y: Vec<T> = b.collect();
    for i in 0..y.len() {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

fn backward<T: Real>(l: &Array2<T>, mut y: Vec<T>) -> Vec<T> {
    let n = y.len();
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}
