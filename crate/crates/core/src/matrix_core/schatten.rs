//! Schatten (quasi-)norms, best rank-r splits, and the Frobenius pairing.

use crate::error::{dim_err, Result, RopError};
use crate::matrix_core::dense::DenseMatrix;
use crate::matrix_core::svd::{svd, SingularDecomposition};
use crate::scalar::Scalar;

/// Relative threshold below which a singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

fn check_exponent<T: Scalar>(p: T) -> Result<()> {
    if p.is_nan() || p <= T::zero() {
        return Err(RopError::Argument(format!(
            "Schatten exponent must be positive, got {p}"
        )));
    }
    Ok(())
}

/// `(sum_j s_j^p)^(1/p)`, or `max_j s_j` when `p` is infinite.
pub fn lp_norm<T: Scalar>(values: &[T], p: T) -> T {
    if p.is_infinite() {
        return values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    }
    pow_sum(values, p).powf(p.recip())
}

/// `sum_j |s_j|^p` (for `p <= 1` this is the p-th power of the quasi-norm).
pub fn pow_sum<T: Scalar>(values: &[T], p: T) -> T {
    if p == T::one() {
        return values.iter().map(|v| v.abs()).sum();
    }
    if p == T::lit(2.0) {
        return values.iter().map(|&v| v * v).sum();
    }
    values
        .iter()
        .map(|v| v.abs())
        .filter(|&v| v > T::zero())
        .map(|v| v.powf(p))
        .sum()
}

/// Schatten-p norm: the `l_p` (quasi-)norm of the singular values. `p` may be
/// `T::infinity()` for the operator norm.
pub fn schatten_norm<T: Scalar>(x: &DenseMatrix<T>, p: T) -> Result<T> {
    check_exponent(p)?;
    Ok(lp_norm(&svd(x)?.sigma, p))
}

/// `||X||_{S_p}^p`.
pub fn schatten_pow<T: Scalar>(x: &DenseMatrix<T>, p: T) -> Result<T> {
    check_exponent(p)?;
    Ok(pow_sum(&svd(x)?.sigma, p))
}

/// Number of singular values above `rel_tol * sigma_1`.
pub fn numerical_rank<T: Scalar>(x: &DenseMatrix<T>, rel_tol: T) -> Result<usize> {
    Ok(svd(x)?.rank(rel_tol))
}

/// `<X, Y> = sum_ij X_ij Y_ij`.
pub fn frobenius_inner<T: Scalar>(x: &DenseMatrix<T>, y: &DenseMatrix<T>) -> Result<T> {
    if x.shape() != y.shape() {
        return Err(dim_err(
            format!("{}x{}", x.rows(), x.cols()),
            format!("{}x{}", y.rows(), y.cols()),
        ));
    }
    Ok(crate::matrix_core::dense::dot(x.as_slice(), y.as_slice()))
}

/// Best rank-r approximation (`head`) and its residual (`tail`).
#[derive(Clone, Debug)]
pub struct RankSplit<T> {
    pub head: DenseMatrix<T>,
    pub tail: DenseMatrix<T>,
    pub r: usize,
    /// Singular values of the source, descending.
    pub sigma: Vec<T>,
}

impl<T: Scalar> RankSplit<T> {
    /// `||tail||_{S_p}^p` computed from the stored spectrum.
    pub fn tail_pow(&self, p: T) -> T {
        pow_sum(&self.sigma[self.r..], p)
    }

    pub fn head_pow(&self, p: T) -> T {
        pow_sum(&self.sigma[..self.r], p)
    }
}

pub fn rank_split<T: Scalar>(x: &DenseMatrix<T>, r: usize) -> Result<RankSplit<T>> {
    let k = x.rows().min(x.cols());
    if r > k {
        return Err(RopError::Argument(format!(
            "rank {r} exceeds min(m, n) = {k}"
        )));
    }
    let dec = svd(x)?;
    Ok(split_from_svd(x, &dec, r))
}

pub(crate) fn split_from_svd<T: Scalar>(
    x: &DenseMatrix<T>,
    dec: &SingularDecomposition<T>,
    r: usize,
) -> RankSplit<T> {
    let truncated: Vec<T> = dec
        .sigma
        .iter()
        .enumerate()
        .map(|(i, &s)| if i < r { s } else { T::zero() })
        .collect();
    let head = dec.recompose_with(&truncated);
    let tail = x - &head;
    RankSplit {
        head,
        tail,
        r,
        sigma: dec.sigma.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_nuclear_norm() {
        assert!(
            (schatten_norm(&DenseMatrix::<f64>::identity(3), 1.0).unwrap() - 3.0).abs() < 1e-14
        );
    }

    #[test]
    fn frobenius_three_four_five() {
        let d = DenseMatrix::from_diag(2, 2, &[3.0f64, 4.0]);
        assert!((schatten_norm(&d, 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((schatten_norm(&d, f64::INFINITY).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_exponent() {
        let d = DenseMatrix::<f64>::identity(2);
        assert!(schatten_norm(&d, 0.0).is_err());
        assert!(schatten_norm(&d, -1.0).is_err());
    }

    #[test]
    fn split_of_rank_one() {
        let s = 0.5f64.sqrt();
        let u = [s, s];
        let v = [0.6, 0.0, 0.8];
        let x = DenseMatrix::outer(&u, &v);
        let split = rank_split(&x, 1).unwrap();
        assert!((&split.head - &x).frobenius_norm() < 1e-14);
        assert!(split.tail.frobenius_norm() < 1e-14);
    }

    #[test]
    fn split_of_diagonal() {
        let x = DenseMatrix::from_diag(3, 3, &[5.0, 3.0, 1.0]);
        let split = rank_split(&x, 2).unwrap();
        assert!(
            (&split.head - &DenseMatrix::from_diag(3, 3, &[5.0, 3.0, 0.0])).frobenius_norm()
                < 1e-14
        );
        assert!(
            (&split.tail - &DenseMatrix::from_diag(3, 3, &[0.0, 0.0, 1.0])).frobenius_norm()
                < 1e-14
        );
        assert!(rank_split(&x, 4).is_err());
    }

    #[test]
    fn inner_products() {
        let i2 = DenseMatrix::<f64>::identity(2);
        assert_eq!(frobenius_inner(&i2, &i2).unwrap(), 2.0);
        assert_eq!(
            frobenius_inner(&i2, &DenseMatrix::zeros(2, 2)).unwrap(),
            0.0
        );
        assert!(frobenius_inner(&i2, &DenseMatrix::zeros(2, 3)).is_err());
    }
}
