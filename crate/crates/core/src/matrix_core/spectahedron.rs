//! Euclidean projections onto the probability simplex and the spectahedron
//! `{X symmetric : X ⪰ 0, tr X = 1}`.

use crate::error::{dim_err, Result};
use crate::matrix_core::dense::DenseMatrix;
use crate::matrix_core::eigen::symmetric_eigen;
use crate::scalar::Scalar;

/// Projection of `v` onto `{x >= 0, sum x = radius}`.
pub fn project_simplex<T: Scalar>(v: &[T], radius: T) -> Vec<T> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (i, &s) in sorted.iter().enumerate() {
        cumsum = cumsum + s;
        let t = (cumsum - radius) / T::from_usize_lossy(i + 1);
        if s - t > T::zero() {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

/// Nearest (Frobenius) positive semidefinite unit-trace matrix to the
/// symmetric part of `x`.
pub fn spectahedron_project<T: Scalar>(x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if x.rows() != x.cols() {
        return Err(dim_err(
            "square matrix",
            format!("{}x{}", x.rows(), x.cols()),
        ));
    }
    let eig = symmetric_eigen(x)?;
    let projected = project_simplex(&eig.values, T::one());
    Ok(eig.recompose_with(&projected).symmetric_part())
}
