//! Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.

use crate::error::{Result, RopError};
use crate::matrix_core::dense::{dot, DenseMatrix};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 80;

/// `X = U diag(sigma) V^T` with `U: m×k`, `V: n×k`, `k = min(m, n)` and
/// `sigma` sorted descending.
#[derive(Clone, Debug)]
pub struct SingularDecomposition<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<T>,
    pub v: DenseMatrix<T>,
}

impl<T: Scalar> SingularDecomposition<T> {
    /// `U diag(values) V^T` for a replacement spectrum of the same length.
    pub fn recompose_with(&self, values: &[T]) -> DenseMatrix<T> {
        assert_eq!(values.len(), self.sigma.len());
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = DenseMatrix::zeros(m, n);
        for (l, &s) in values.iter().enumerate() {
            if s == T::zero() {
                continue;
            }
            for i in 0..m {
                let ui = self.u[(i, l)] * s;
                if ui == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + ui * self.v[(j, l)];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DenseMatrix<T> {
        self.recompose_with(&self.sigma)
    }

    /// Number of singular values above `rel_tol * sigma_1`.
    pub fn rank(&self, rel_tol: T) -> usize {
        let top = self.sigma.first().copied().unwrap_or_else(T::zero);
        if top == T::zero() {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > rel_tol * top).count()
    }
}

/// Computes the thin SVD of `x`.
///
/// Fails with [`RopError::NonConvergence`] (reporting the sweep count) if the
/// rotations have not orthogonalized every column pair after the sweep cap.
pub fn svd<T: Scalar>(x: &DenseMatrix<T>) -> Result<SingularDecomposition<T>> {
    if !x.is_finite() {
        return Err(RopError::Argument(
            "svd of a matrix with non-finite entries".into(),
        ));
    }
    if x.rows() >= x.cols() {
        jacobi_tall(x)
    } else {
        let t = jacobi_tall(&x.transpose())?;
        Ok(SingularDecomposition {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        })
    }
}

/// Singular values only, descending.
pub fn singular_values<T: Scalar>(x: &DenseMatrix<T>) -> Result<Vec<T>> {
    Ok(svd(x)?.sigma)
}

fn jacobi_tall<T: Scalar>(x: &DenseMatrix<T>) -> Result<SingularDecomposition<T>> {
    let (m, n) = x.shape();
    let mut a: Vec<Vec<T>> = (0..n).map(|j| x.column(j)).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let tol = T::epsilon() * T::from_usize_lossy(m.max(2));

    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let alpha = dot(&a[i], &a[i]);
                let beta = dot(&a[j], &a[j]);
                if alpha <= T::min_positive_value() || beta <= T::min_positive_value() {
                    continue;
                }
                let gamma = dot(&a[i], &a[j]);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(RopError::NonConvergence {
            what: "jacobi svd",
            iterations: sweeps,
        });
    }

    let norms: Vec<T> = a.iter().map(|col| dot(col, col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| norms[q].partial_cmp(&norms[p]).expect("finite norms"));

    let mut u_cols: Vec<Option<Vec<T>>> = Vec::with_capacity(n);
    for &k in &order {
        let s = norms[k];
        if s > T::min_positive_value() {
            u_cols.push(Some(a[k].iter().map(|&e| e / s).collect()));
        } else {
            u_cols.push(None);
        }
    }
    let u_cols = complete_orthonormal(u_cols, m);

    let sigma = order.iter().map(|&k| norms[k]).collect();
    let u = DenseMatrix::from_fn(m, n, |i, l| u_cols[l][i]);
    let v = DenseMatrix::from_fn(n, n, |i, l| v[order[l]][i]);
    Ok(SingularDecomposition { u, sigma, v })
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(j);
    for (p, q) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
        let (x, y) = (*p, *q);
        *p = c * x - s * y;
        *q = s * x + c * y;
    }
}

/// Fills missing columns with unit vectors orthogonal to the present ones.
pub(crate) fn complete_orthonormal<T: Scalar>(
    cols: Vec<Option<Vec<T>>>,
    dim: usize,
) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = cols.iter().flatten().cloned().collect();
    let mut next_unit = 0;
    cols.into_iter()
        .map(|c| match c {
            Some(c) => c,
            None => loop {
                assert!(next_unit < dim, "cannot complete orthonormal basis");
                let mut e = vec![T::zero(); dim];
                e[next_unit] = T::one();
                next_unit += 1;
                for _ in 0..2 {
                    for b in &basis {
                        let d = dot(b, &e);
                        for (x, &y) in e.iter_mut().zip(b) {
                            *x = *x - d * y;
                        }
                    }
                }
                let nrm = dot(&e, &e).sqrt();
                if nrm > T::lit(1e-3) {
                    e.iter_mut().for_each(|x| *x = *x / nrm);
                    basis.push(e.clone());
                    break e;
                }
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormal_cols(q: &DenseMatrix<f64>, tol: f64) -> bool {
        let g = q.tr_matmul(q).unwrap();
        let k = g.rows();
        (0..k).all(|i| (0..k).all(|j| (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() <= tol))
    }

    #[test]
    fn diagonal_matrix() {
        let d = DenseMatrix::from_rows(&[&[3.0, 0.0], &[0.0, 1.0]]);
        let s = svd(&d).unwrap();
        assert_eq!(s.sigma, vec![3.0, 1.0]);
        assert_eq!(s.u, DenseMatrix::identity(2));
        assert_eq!(s.v, DenseMatrix::identity(2));
    }

    #[test]
    fn zero_matrix_has_orthonormal_factors() {
        let z = DenseMatrix::<f64>::zeros(4, 3);
        let s = svd(&z).unwrap();
        assert_eq!(s.sigma, vec![0.0; 3]);
        assert!(orthonormal_cols(&s.u, 1e-12));
        assert!(orthonormal_cols(&s.v, 1e-12));
    }

    #[test]
    fn wide_and_rank_deficient() {
        let x = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]]);
        let s = svd(&x).unwrap();
        assert_eq!(s.u.shape(), (2, 2));
        assert_eq!(s.v.shape(), (4, 2));
        assert!(s.sigma[1] < 1e-12);
        assert_eq!(s.rank(1e-10), 1);
        assert!(orthonormal_cols(&s.u, 1e-12));
        assert!(orthonormal_cols(&s.v, 1e-12));
        assert!((&s.reconstruct() - &x).frobenius_norm() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let mut x = DenseMatrix::<f64>::zeros(2, 2);
        x[(0, 1)] = f64::INFINITY;
        assert!(svd(&x).is_err());
    }

    #[test]
    fn single_precision() {
        let x = DenseMatrix::<f32>::from_rows(&[&[3.0, 0.0], &[4.0, 5.0]]);
        let s = svd(&x).unwrap();
        // singular values of [[3,0],[4,5]] are 3*sqrt(5) and sqrt(5)
        assert!((s.sigma[0] - 3.0 * 5f32.sqrt()).abs() < 1e-5);
        assert!((s.sigma[1] - 5f32.sqrt()).abs() < 1e-5);
    }
}
