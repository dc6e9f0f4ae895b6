//! Lowest eigenpairs of a banded pencil `(K, M)` by subspace iteration.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::banded::SymBand;
use super::dense::generalized_eigen;
use crate::error::{Result, VbiError};
use crate::scalar::Real;

/// Below this size the pencil is solved densely.
pub const DENSE_LIMIT: usize = 64;

const MAX_ITERATIONS: usize = 500;

/// Returns the `count` smallest eigenvalues of `K x = λ M x`, ascending.
pub fn lowest_eigenvalues<T: Real>(k: &SymBand<T>, m: &SymBand<T>, count: usize) -> Result<Vec<T>> {
    let n = k.dim();
    if m.dim() != n {
        return Err(VbiError::DimensionMismatch {
            context: "eigenproblem mass matrix",
            expected: n,
            found: m.dim(),
        });
    }
    if count == 0 || count > n {
        return Err(VbiError::InvalidParameter {
            name: "count",
            reason: format!("requested {count} modes from a system with {n} free DOFs"),
        });
    }
    if n <= DENSE_LIMIT {
        let (vals, _) = generalized_eigen(&k.to_dense(), &m.to_dense())?;
        return Ok(vals[..count].to_vec());
    }

    let factor = k.cholesky()?;
    let q = n.min((2 * count).max(count + 8));
    let tol = T::epsilon().sqrt() * T::lit(1e-4);

    // Starting block: diag(M) plus seeded random vectors.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = Array2::<T>::zeros((n, q));
    let diag_m = m.diagonal();
    for i in 0..n {
        x[[i, 0]] = diag_m[i];
        for j in 1..q {
            x[[i, j]] = T::lit(rng.random::<f64>() - 0.5);
        }
    }

    let mut previous: Option<Vec<T>> = None;
    let mut residual = T::infinity();
    for _ in 0..MAX_ITERATIONS {
        // Y = M X, X̄ = K⁻¹ Y, so that K X̄ = Y.
        let mut xbar = Array2::<T>::zeros((n, q));
        let mut y = Array2::<T>::zeros((n, q));
        for j in 0..q {
            let col: Vec<T> = x.column(j).to_vec();
            let yj = m.mul_vec(&col);
            let xj = factor.solve(&yj);
            for i in 0..n {
                y[[i, j]] = yj[i];
                xbar[[i, j]] = xj[i];
            }
        }
        let mut kr = Array2::<T>::zeros((q, q));
        let mut mr = Array2::<T>::zeros((q, q));
        let mxbar: Vec<Vec<T>> = (0..q).map(|j| m.mul_vec(&xbar.column(j).to_vec())).collect();
        for a in 0..q {
            for b in 0..=a {
                let mut sk = T::zero();
                let mut sm = T::zero();
                for i in 0..n {
                    sk += xbar[[i, a]] * y[[i, b]];
                    sm += xbar[[i, a]] * mxbar[b][i];
                }
                kr[[a, b]] = sk;
                kr[[b, a]] = sk;
                mr[[a, b]] = sm;
                mr[[b, a]] = sm;
            }
        }
        let (vals, vecs) = generalized_eigen(&kr, &mr)?;
        x = xbar.dot(&vecs);
        if let Some(prev) = &previous {
            residual = vals
                .iter()
                .zip(prev)
                .take(count)
                .map(|(&a, &b)| ((a - b) / a).abs())
                .fold(T::zero(), T::max);
            if residual < tol {
                return Ok(vals[..count].to_vec());
            }
        }
        previous = Some(vals);
    }
    Err(VbiError::EigenNoConvergence {
        iterations: MAX_ITERATIONS,
        residual: residual.as_f64(),
        condition: factor.condition_estimate().as_f64(),
    })
}
