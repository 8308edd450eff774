//! Small dense matrices and the Hermitian solve behind the minimum-norm filter.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone + Default> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `xᴴ y`.
pub fn dot_conj(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// `xᴴ A x` for a real symmetric `A`.
pub fn quadratic_form(a: &Matrix<f64>, x: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.rows() {
        let row = a.row(i);
        let ax: Complex64 = row.iter().zip(x).map(|(&g, v)| v * g).sum();
        acc += x[i].conj() * ax;
    }
    acc.re
}

/// Relative pivot size below which a row of the Gram matrix is treated as
/// linearly dependent on the rows above it.
const PIVOT_TOLERANCE: f64 = 1e-13;

/// Minimum-norm solver for a fat complex system `A h = b`.
///
/// Factors the Gram matrix `A Aᴴ + λ I` once by Cholesky; each right-hand
/// side then costs two triangular solves and a product with `Aᴴ`.
#[derive(Debug, Clone)]
pub struct MinNormSolver {
    a: Matrix<Complex64>,
    chol: Matrix<Complex64>,
    loading: f64,
}

impl MinNormSolver {
    /// `regularization` is relative: the diagonal load is
    /// `regularization · trace(A Aᴴ) / rows`.
    pub fn new(a: Matrix<Complex64>, regularization: f64) -> Result<Self> {
        if !(regularization >= 0.0) || !regularization.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!(
                "regularization must be finite and non-negative, got {regularization}"
            )));
        }
        let r = a.rows();
        let mut gram = Matrix::<Complex64>::zeros(r, r);
        for i in 0..r {
            for j in 0..=i {
                // (A Aᴴ)_ij = Σ_k A_ik conj(A_jk)
                let v: Complex64 = a
                    .row(i)
                    .iter()
                    .zip(a.row(j))
                    .map(|(x, y)| x * y.conj())
                    .sum();
                gram[(i, j)] = v;
                gram[(j, i)] = v.conj();
            }
        }
        let trace: f64 = (0..r).map(|i| gram[(i, i)].re).sum();
        let loading = if r == 0 {
            0.0
        } else {
            regularization * trace / r as f64
        };
        for i in 0..r {
            gram[(i, i)] += loading;
        }
        let chol = cholesky(&gram)?;
        Ok(MinNormSolver { a, chol, loading })
    }

    pub fn matrix(&self) -> &Matrix<Complex64> {
        &self.a
    }

    /// Absolute diagonal load applied to the Gram matrix.
    pub fn loading(&self) -> f64 {
        self.loading
    }

    /// `h = Aᴴ (A Aᴴ + λI)⁻¹ b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let r = self.chol.rows();
        assert_eq!(
            b.len(),
            r,
            "right-hand side length must match the row count"
        );
        // L y = b
        let mut y = vec![Complex64::new(0.0, 0.0); r];
        for i in 0..r {
            let mut s = b[i];
            for k in 0..i {
                s -= self.chol[(i, k)] * y[k];
            }
            y[i] = s / self.chol[(i, i)].re;
        }
        // Lᴴ z = y
        let mut z = y;
        for i in (0..r).rev() {
            let mut s = z[i];
            for k in i + 1..r {
                s -= self.chol[(k, i)].conj() * z[k];
            }
            z[i] = s / self.chol[(i, i)].re;
        }
        let cols = self.a.cols();
        let mut h = vec![Complex64::new(0.0, 0.0); cols];
        for (i, zi) in z.iter().enumerate() {
            for (hj, aij) in h.iter_mut().zip(self.a.row(i)) {
                *hj += aij.conj() * zi;
            }
        }
        h
    }
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
fn cholesky(g: &Matrix<Complex64>) -> Result<Matrix<Complex64>> {
    let n = g.rows();
    let mut l = Matrix::<Complex64>::zeros(n, n);
    let mut max_pivot: f64 = 0.0;
    for j in 0..n {
        let mut d = g[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        let diag = g[(j, j)].re;
        if !(d > PIVOT_TOLERANCE * diag) || !(diag > 0.0) {
            let condition = if d > 0.0 && max_pivot > 0.0 {
                max_pivot.max(d) / d
            } else {
                f64::INFINITY
            };
            return Err(Error::RankDeficient { condition });
        }
        max_pivot = max_pivot.max(d);
        let ljj = libm::sqrt(d);
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}
