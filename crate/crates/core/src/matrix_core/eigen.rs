//! Symmetric eigendecomposition (cyclic Jacobi) and Cholesky solves.

use crate::error::{dim_err, Result, RopError};
use crate::matrix_core::dense::DenseMatrix;
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// `A = Q diag(values) Q^T`, eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

impl<T: Scalar> SymmetricEigen<T> {
    pub fn recompose_with(&self, values: &[T]) -> DenseMatrix<T> {
        let n = self.vectors.rows();
        let q = &self.vectors;
        let mut out = DenseMatrix::zeros(n, n);
        for (l, &lam) in values.iter().enumerate() {
            if lam == T::zero() {
                continue;
            }
            for i in 0..n {
                let qi = q[(i, l)] * lam;
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + qi * q[(j, l)];
                }
            }
        }
        out
    }
}

/// Eigendecomposition of the symmetric part of `a`.
pub fn symmetric_eigen<T: Scalar>(a: &DenseMatrix<T>) -> Result<SymmetricEigen<T>> {
    let (n, c) = a.shape();
    if n != c {
        return Err(dim_err("square matrix", format!("{n}x{c}")));
    }
    let mut w = a.symmetric_part();
    let mut q = DenseMatrix::<T>::identity(n);
    let floor = T::epsilon() * w.frobenius_norm();
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        if sweeps == MAX_SWEEPS {
            return Err(RopError::NonConvergence {
                what: "jacobi eigensolver",
                iterations: sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for r in p + 1..n {
                let apr = w[(p, r)];
                let negligible = T::epsilon() * (w[(p, p)].abs() * w[(r, r)].abs()).sqrt();
                if apr.abs() <= negligible.max(floor) {
                    w[(p, r)] = T::zero();
                    w[(r, p)] = T::zero();
                    continue;
                }
                rotated = true;
                let theta = (w[(r, r)] - w[(p, p)]) / (T::lit(2.0) * apr);
                let t = theta.signum() / (theta.abs() + (T::one() + theta * theta).sqrt());
                let cth = T::one() / (T::one() + t * t).sqrt();
                let s = t * cth;
                for k in 0..n {
                    let (wkp, wkr) = (w[(k, p)], w[(k, r)]);
                    w[(k, p)] = cth * wkp - s * wkr;
                    w[(k, r)] = s * wkp + cth * wkr;
                }
                for k in 0..n {
                    let (wpk, wrk) = (w[(p, k)], w[(r, k)]);
                    w[(p, k)] = cth * wpk - s * wrk;
                    w[(r, k)] = s * wpk + cth * wrk;
                }
                for k in 0..n {
                    let (qkp, qkr) = (q[(k, p)], q[(k, r)]);
                    q[(k, p)] = cth * qkp - s * qkr;
                    q[(k, r)] = s * qkp + cth * qkr;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        w[(y, y)]
            .partial_cmp(&w[(x, x)])
            .expect("finite eigenvalues")
    });
    Ok(SymmetricEigen {
        values: order.iter().map(|&k| w[(k, k)]).collect(),
        vectors: DenseMatrix::from_fn(n, n, |i, l| q[(i, order[l])]),
    })
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: DenseMatrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        Self::with_jitter(a, T::zero())
    }

    /// Factors `a + jitter * I`.
    pub fn with_jitter(a: &DenseMatrix<T>, jitter: T) -> Result<Self> {
        let (n, c) = a.shape();
        if n != c {
            return Err(dim_err("square matrix", format!("{n}x{c}")));
        }
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)] + jitter;
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if d <= T::zero() || !d.is_finite() {
                return Err(RopError::Argument(format!(
                    "matrix not positive definite (pivot {j})"
                )));
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                let (ri, rj) = (l.row(i), l.row(j));
                for k in 0..j {
                    s = s - ri[k] * rj[k];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let mut s = y[i];
            for k in 0..i {
                s = s - row[k] * y[k];
            }
            y[i] = s / row[i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for (k, &yk) in y.iter().enumerate().skip(i + 1) {
                s = s - self.l[(k, i)] * yk;
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }
}
