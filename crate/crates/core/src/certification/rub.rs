use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, RopError};
use crate::matrix_core::DenseMatrix;
use crate::measurement::rng::{normal_vec, substream};
use crate::measurement::LinearMap;
use crate::scalar::Scalar;

/// Sampled `l_q`-RUB constants of order `r`.
///
/// These are inner estimates of the true constants: `c1_hat >= C1*` and
/// `c2_hat <= C2*`, so any condition evaluated from them is optimistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RubEstimate<T> {
    pub q: T,
    pub r: usize,
    pub c1_hat: T,
    pub c2_hat: T,
    /// Mean sampled ratio.
    pub mean: T,
    pub trials: usize,
    pub seed: u64,
}

/// Random rank-`r` matrix `G1 G2^T / ||G1 G2^T||_F` drawn from stream
/// `trial` of `seed`.
pub fn sample_rank_r<T: Scalar>(
    m: usize,
    n: usize,
    r: usize,
    seed: u64,
    trial: u64,
) -> Result<DenseMatrix<T>> {
    let mut rng = substream(seed, trial);
    let g1 = DenseMatrix::from_vec(m, r, normal_vec(&mut rng, m * r))?;
    let g2 = DenseMatrix::from_vec(n, r, normal_vec(&mut rng, n * r))?;
    let x = g1.matmul(&g2.transpose())?;
    let nrm = x.frobenius_norm();
    Ok(x.scale(T::one() / nrm))
}

/// `||A(X)||_q^q / L` for a unit-Frobenius `X`.
pub fn rub_ratio<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    x: &DenseMatrix<T>,
    q: T,
) -> Result<T> {
    let ax = map.apply(x)?;
    let f = x.frobenius_norm();
    let s: T = ax.iter().map(|v| v.abs().powf(q)).sum();
    Ok(s / T::from_usize_lossy(map.len()) / f.powf(q))
}

/// Estimates the `l_q`-RUB constants of `map` at rank `r` from `trials`
/// random rank-`r` matrices. Trial `j` uses its own substream, so a run with
/// more trials sees a superset of the samples of a shorter run.
pub fn estimate_rub<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    r: usize,
    q: T,
    trials: usize,
    seed: u64,
) -> Result<RubEstimate<T>> {
    let (m, n) = map.input_shape();
    if trials == 0 {
        return Err(RopError::Argument("trials must be at least 1".into()));
    }
    if r == 0 || r > m.min(n) {
        return Err(RopError::Argument(format!(
            "rank order {r} outside 1..={}",
            m.min(n)
        )));
    }
    if !(q > T::zero()) {
        return Err(RopError::Argument(format!("q must be positive, got {q}")));
    }
    if map.is_empty() {
        return Err(RopError::Argument("the map has no measurements".into()));
    }
    let ratios: Vec<T> = (0..trials as u64)
        .into_par_iter()
        .map(|j| rub_ratio(map, &sample_rank_r(m, n, r, seed, j)?, q))
        .collect::<Result<_>>()?;
    let c1_hat = ratios.iter().copied().fold(T::infinity(), T::min);
    let c2_hat = ratios.iter().copied().fold(T::neg_infinity(), T::max);
    let mean = ratios.iter().copied().sum::<T>() / T::from_usize_lossy(trials);
    Ok(RubEstimate {
        q,
        r,
        c1_hat,
        c2_hat,
        mean: mean.max(c1_hat).min(c2_hat),
        trials,
        seed,
    })
}
