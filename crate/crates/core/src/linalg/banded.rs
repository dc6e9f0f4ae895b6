//! Symmetric banded storage with an in-place band Cholesky factorization.
//!
//! Only the lower band is stored: row `i` holds `A[i][i-k]` for
//! `k = 0..=half_bandwidth`, so a tridiagonal matrix has `half_bandwidth == 1`.

use ndarray::Array2;

use crate::error::{Result, VbiError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SymBand<T> {
    n: usize,
    bw: usize,
    data: Vec<T>,
}

impl<T: Real> SymBand<T> {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        Self {
            n,
            bw: half_bandwidth,
            data: vec![T::zero(); n * (half_bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        (k <= self.bw).then_some(r * (self.bw + 1) + k)
    }

    /// Entry `A[i][j]`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |s| self.data[s])
    }

    /// Adds `value` to `A[i][j]` (and implicitly `A[j][i]`).
    ///
    /// Panics when `(i, j)` falls outside the band.
    pub fn add(&mut self, i: usize, j: usize, value: T) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside half bandwidth {}", self.bw));
        self.data[s] += value;
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.data[i * (self.bw + 1)]).collect()
    }

    /// `alpha * self + beta * other`; both operands must share a shape.
    pub fn linear_combination(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if self.n != other.n || self.bw != other.bw {
            return Err(VbiError::DimensionMismatch {
                context: "banded linear combination",
                expected: self.n,
                found: other.n,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| alpha * a + beta * b)
            .collect();
        Ok(Self {
            n: self.n,
            bw: self.bw,
            data,
        })
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            n: self.n,
            bw: self.bw,
            data: self.data.iter().map(|&a| alpha * a).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        let w = self.bw + 1;
        for v in y.iter_mut() {
            *v = T::zero();
        }
        for i in 0..self.n {
            let row = &self.data[i * w..(i + 1) * w];
            let xi = x[i];
            let mut acc = row[0] * xi;
            for k in 1..=self.bw.min(i) {
                let a = row[k];
                acc += a * x[i - k];
                y[i - k] += a * xi;
            }
            y[i] += acc;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(&a, &b)| a * b).sum()
    }

    /// Frobenius norm of the full (symmetric) matrix.
    pub fn frobenius_norm(&self) -> T {
        let w = self.bw + 1;
        let mut s = T::zero();
        for i in 0..self.n {
            for k in 0..=self.bw.min(i) {
                let a = self.data[i * w + k];
                s += if k == 0 { a * a } else { T::lit(2.0) * a * a };
            }
        }
        s.sqrt()
    }

    pub fn to_dense(&self) -> Array2<T> {
        let mut a = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let v = self.get(i, j);
                a[[i, j]] = v;
                a[[j, i]] = v;
            }
        }
        a
    }

    /// Band Cholesky factor `A = L Lᵀ`.
    pub fn cholesky(&self) -> Result<BandCholesky<T>> {
        BandCholesky::factor(self)
    }

    /// Calls `f(i, j, value)` for every stored entry with `i >= j`.
    pub fn for_each_lower(&self, mut f: impl FnMut(usize, usize, T)) {
        let w = self.bw + 1;
        for i in 0..self.n {
            for k in 0..=self.bw.min(i) {
                f(i, i - k, self.data[i * w + k]);
            }
        }
    }
}

/// Lower band Cholesky factor, reused across any number of solves.
#[derive(Debug, Clone)]
pub struct BandCholesky<T> {
    n: usize,
    bw: usize,
    l: Vec<T>,
}

impl<T: Real> BandCholesky<T> {
    pub fn factor(a: &SymBand<T>) -> Result<Self> {
        let n = a.n;
        let bw = a.bw;
        let w = bw + 1;
        let mut l = a.data.clone();
        for j in 0..n {
            let jlo = j.saturating_sub(bw);
            let mut d = l[j * w];
            for k in jlo..j {
                let ljk = l[j * w + (j - k)];
                d -= ljk * ljk;
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(VbiError::NotPositiveDefinite {
                    pivot: j,
                    value: d.as_f64(),
                });
            }
            let djj = d.sqrt();
            l[j * w] = djj;
            for i in (j + 1)..n.min(j + bw + 1) {
                let ilo = i.saturating_sub(bw);
                let mut s = l[i * w + (i - j)];
                for k in ilo.max(jlo)..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                l[i * w + (i - j)] = s / djj;
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        debug_assert_eq!(b.len(), self.n);
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut s = b[i];
            for k in 1..=self.bw.min(i) {
                s -= self.l[i * w + k] * b[i - k];
            }
            b[i] = s / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for j in (i + 1)..self.n.min(i + self.bw + 1) {
                s -= self.l[j * w + (j - i)] * b[j];
            }
            b[i] = s / self.l[i * w];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Squared ratio of extreme pivots; a cheap lower bound on the 2-norm condition number.
    pub fn condition_estimate(&self) -> T {
        let w = self.bw + 1;
        let (mut lo, mut hi) = (T::infinity(), T::zero());
        for i in 0..self.n {
            let d = self.l[i * w];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (hi / lo) * (hi / lo)
    }
}
