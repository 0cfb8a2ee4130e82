//! Rank-descent refinement for the nonconvex equality program.
//!
//! For `p < 1` every rank-deficient feasible point is a cusp of
//! `||X||_{S_p}^p`, and smoothed IRLS tends to settle just beside one (a tiny
//! trailing singular value) or in a smooth basin next to a narrow cusp. The
//! refinement looks for exactly rank-`j` feasible points near the IRLS answer
//! by alternating least squares on `X = U V^T`.

use crate::error::Result;
use crate::matrix_core::{svd, DenseMatrix};
use crate::measurement::LinearMap;
use crate::scalar::Scalar;
use crate::solvers::common::{norm2, psd_solve};

/// Singular values below this fraction of the largest count as zero when
/// choosing the starting rank.
pub(crate) const RANK_GAP: f64 = 1e-3;

/// Skip the refinement when materializing the measurement matrices would
/// need more than this many entries.
const ENTRY_CAP: usize = 20_000_000;

const MAX_SWEEPS: usize = 500;

pub(crate) struct Refiner<T> {
    mats: Vec<DenseMatrix<T>>,
    b: Vec<T>,
}

impl<T: Scalar> Refiner<T> {
    pub(crate) fn new<M: LinearMap<T> + ?Sized>(map: &M, b: &[T]) -> Option<Self> {
        let (m, n) = map.input_shape();
        if map.len() * m * n > ENTRY_CAP {
            return None;
        }
        let mats = (0..map.len()).map(|l| map.measurement_matrix(l)).collect();
        Some(Self {
            mats,
            b: b.to_vec(),
        })
    }

    fn residual(&self, x: &DenseMatrix<T>) -> T {
        let r: Vec<T> = self
            .mats
            .iter()
            .zip(&self.b)
            .map(|(a, &bl)| bl - crate::matrix_core::dot(a.as_slice(), x.as_slice()))
            .collect();
        norm2(&r)
    }

    /// Least squares over `X = U Y^T` (`left = true`) or `X = Z V^T`, with
    /// `basis` the fixed orthonormal factor.
    fn half_step(&self, basis: &DenseMatrix<T>, left: bool) -> Result<DenseMatrix<T>> {
        let j = basis.cols();
        let rows: Vec<DenseMatrix<T>> = self
            .mats
            .iter()
            .map(|a| {
                if left {
                    basis.transpose().matmul(a)
                } else {
                    a.matmul(basis)
                }
            })
            .collect::<Result<_>>()?;
        let k = rows[0].as_slice().len();
        let mut normal = DenseMatrix::zeros(k, k);
        let mut rhs = vec![T::zero(); k];
        for (row, &bl) in rows.iter().zip(&self.b) {
            let r = row.as_slice();
            for a in 0..k {
                rhs[a] = rhs[a] + r[a] * bl;
                for c in a..k {
                    normal[(a, c)] = normal[(a, c)] + r[a] * r[c];
                }
            }
        }
        for a in 0..k {
            for c in 0..a {
                normal[(a, c)] = normal[(c, a)];
            }
        }
        let y = psd_solve(&normal, &rhs)?;
        if left {
            // y is U^T X, a j × n block.
            let yt = DenseMatrix::from_vec(j, k / j, y)?;
            basis.matmul(&yt)
        } else {
            // y is X V, an m × j block.
            let z = DenseMatrix::from_vec(k / j, j, y)?;
            z.matmul(&basis.transpose())
        }
    }

    /// A rank-`j` point near `x` minimizing `||A(X) - b||_2` locally. The
    /// caller decides whether it is feasible.
    pub(crate) fn rank_point(
        &self,
        x: &DenseMatrix<T>,
        j: usize,
    ) -> Result<(DenseMatrix<T>, usize)> {
        let bnorm = norm2(&self.b).max(T::min_positive_value());
        let mut cur = x.clone();
        let mut last = T::infinity();
        let mut sweeps = 0;
        while sweeps < MAX_SWEEPS {
            sweeps += 1;
            let dec = svd(&cur)?;
            let u = column_block(&dec.u, j);
            cur = self.half_step(&u, true)?;
            let dec = svd(&cur)?;
            let v = column_block(&dec.v, j);
            cur = self.half_step(&v, false)?;
            let res = self.residual(&cur) / bnorm;
            if res <= T::lit(1e-14) || res > last * T::lit(0.999) {
                break;
            }
            last = res;
        }
        Ok((cur, sweeps))
    }
}

fn column_block<T: Scalar>(a: &DenseMatrix<T>, j: usize) -> DenseMatrix<T> {
    DenseMatrix::from_fn(a.rows(), j, |r, c| a[(r, c)])
}

pub(crate) fn numerical_rank<T: Scalar>(sigma: &[T]) -> usize {
    let top = sigma.first().copied().unwrap_or_else(T::zero);
    sigma
        .iter()
        .filter(|&&s| s > T::lit(RANK_GAP) * top)
        .count()
}
