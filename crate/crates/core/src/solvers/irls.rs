//! Iteratively reweighted least squares for `min ||X||_{S_p}^p s.t. A(X) = b`.
//!
//! Each step minimizes `tr(W X X^T)` with `W = (X_t X_t^T + eps I)^{p/2 - 1}`
//! over the affine set. The minimizer is `X = W^{-1} A*(lambda)` where
//! `lambda` solves the `L × L` system `G lambda = b`, `G_jk = <A_j, W^{-1} A_k>`.

use crate::error::Result;
use crate::matrix_core::{svd, DenseMatrix};
use crate::measurement::LinearMap;
use crate::scalar::Scalar;
use crate::solvers::common::{psd_solve, relative_change, Run};
use crate::solvers::config::SolverConfig;

// eps shrinks only once the iterates have settled at the current smoothing
// level: relative change <= DECAY_GATE * sqrt(eps / scale^2). Shrinking every
// step freezes nonconvex runs in poor basins.
const DECAY_GATE: f64 = 0.01;

/// `(X X^T + eps I)^{1 - p/2}` together with the smoothed objective
/// `sum_i (sigma_i^2 + eps)^{p/2}` over all `m` eigenvalues of `X X^T`.
fn weight_inverse<T: Scalar>(x: &DenseMatrix<T>, eps: T, p: T) -> Result<(DenseMatrix<T>, T)> {
    let m = x.rows();
    let dec = svd(x)?;
    let half = p / T::lit(2.0);
    let e = T::one() - half;
    let base = eps.powf(e);
    let mut w = DenseMatrix::identity(m).scale(base);
    let k = dec.sigma.len();
    for (l, &s) in dec.sigma.iter().enumerate() {
        let d = (s * s + eps).powf(e) - base;
        if d == T::zero() {
            continue;
        }
        for i in 0..m {
            let ui = dec.u[(i, l)] * d;
            for j in 0..m {
                w[(i, j)] = w[(i, j)] + ui * dec.u[(j, l)];
            }
        }
    }
    let surrogate = dec
        .sigma
        .iter()
        .map(|&s| (s * s + eps).powf(half))
        .sum::<T>()
        + T::from_usize_lossy(m - k) * eps.powf(half);
    Ok((w, surrogate))
}

/// Smoothed objective `J(X, eps)`; equals `||X||_{S_p}^p` at `eps = 0`.
pub(crate) fn surrogate<T: Scalar>(x: &DenseMatrix<T>, eps: T, p: T) -> Result<T> {
    weight_inverse(x, eps, p).map(|(_, j)| j)
}

/// One IRLS run from `init`. `scale2` sets the unit of `eps` so that the run
/// is equivariant under `b -> c b`.
///
/// The trace holds `J(X_t, eps_t)` for `t >= 1`, which is nonincreasing:
/// `J(X_{t+1}, eps_{t+1}) <= J(X_{t+1}, eps_t) <= J(X_t, eps_t)`.
pub(crate) fn irls_run<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &[T],
    p: T,
    cfg: &SolverConfig<T>,
    init: &DenseMatrix<T>,
    scale2: T,
) -> Result<Run<T>> {
    let floor = cfg.smoothing_floor * scale2;
    let mut eps_rel = cfg.smoothing_epsilon_initial;
    let mut eps = (eps_rel * scale2).max(floor);
    let mut x = init.clone();
    let mut trace = Vec::new();
    let mut rel = T::infinity();
    let mut stopped = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let (winv, _) = weight_inverse(&x, eps, p)?;
        let g = map.left_weighted_gram(&winv);
        let lambda = psd_solve(&g, b)?;
        let next = winv.matmul(&map.adjoint(&lambda)?)?;
        rel = relative_change(&next, &x);
        let at_floor = eps <= floor;
        if rel <= T::lit(DECAY_GATE) * eps_rel.sqrt() {
            eps_rel = eps_rel * cfg.smoothing_decay;
        }
        eps = (eps_rel * scale2).max(floor);
        x = next;
        trace.push(surrogate(&x, eps, p)?);
        if at_floor && rel <= cfg.tolerance {
            stopped = true;
            break;
        }
    }
    let objective = crate::matrix_core::schatten_pow(&x, p)?;
    Ok(Run {
        x,
        objective,
        trace,
        iterations,
        rel_change: rel,
        stopped,
    })
}
