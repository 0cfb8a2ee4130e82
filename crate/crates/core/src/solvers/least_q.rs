//! `min ||A(X) - b||_q^q s.t. ||X||_{S_p} = 1`.
//!
//! Each iteration smooths the loss to `F_eps(X) = sum_j (r_j^2 + eps^2)^{q/2}`,
//! takes the damped reweighted least-squares direction
//! `D = -A*((K + mu W^{-1})^{-1} r)` with weights `w_j = (r_j^2 + eps^2)^{q/2 - 1}`,
//! and backtracks along `t ↦ (X + t D) / ||X + t D||_{S_p}` until `F_eps`
//! decreases. `q = 2` gives the least-squares sphere estimator.

use crate::error::Result;
use crate::matrix_core::{schatten_norm, DenseMatrix};
use crate::measurement::LinearMap;
use crate::scalar::Scalar;
use crate::solvers::common::{psd_solve, relative_change, sub, Run};
use crate::solvers::config::SolverConfig;

const MAX_HALVINGS: usize = 40;

fn smoothed<T: Scalar>(r: &[T], eps: T, q: T) -> T {
    let e2 = eps * eps;
    r.iter().map(|&v| (v * v + e2).powf(q / T::lit(2.0))).sum()
}

pub(crate) fn loss<T: Scalar>(r: &[T], q: T) -> T {
    r.iter().map(|&v| v.abs().powf(q)).sum()
}

/// `X / ||X||_{S_p}`, or `None` for the zero matrix.
pub(crate) fn retract<T: Scalar>(x: &DenseMatrix<T>, p: T) -> Result<Option<DenseMatrix<T>>> {
    let nrm = schatten_norm(x, p)?;
    Ok(if nrm > T::zero() && nrm.is_finite() {
        Some(x.scale(T::one() / nrm))
    } else {
        None
    })
}

/// One run from `init`, which must already lie on the sphere.
pub(crate) fn least_q_run<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    gram: &DenseMatrix<T>,
    b: &[T],
    p: T,
    q: T,
    cfg: &SolverConfig<T>,
    init: &DenseMatrix<T>,
) -> Result<Run<T>> {
    let l = b.len();
    let lf = T::from_usize_lossy(l.max(1));
    let rms = |v: &[T]| (v.iter().map(|&x| x * x).sum::<T>() / lf).sqrt();
    let mut x = init.clone();
    let mut r = sub(&map.apply(&x)?, b);
    let unit = {
        let u = rms(b);
        if u > T::zero() {
            u
        } else {
            rms(&r).max(T::min_positive_value())
        }
    };
    let kdiag = gram.trace() / lf;
    let floor = cfg.smoothing_floor * unit;
    let mut eps_rel = cfg.smoothing_epsilon_initial;
    let mut eps = (eps_rel * unit).max(floor);
    let half = q / T::lit(2.0);

    let mut trace = Vec::new();
    let mut rel = T::infinity();
    let mut stopped = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let e2 = eps * eps;
        let inv_w: Vec<T> = r
            .iter()
            .map(|&v| (v * v + e2).powf(T::one() - half))
            .collect();
        let mean_inv = inv_w.iter().copied().sum::<T>() / lf;
        let mu = T::lit(1e-6) * kdiag / mean_inv.max(T::min_positive_value());
        let mut sys = gram.clone();
        for (j, &iw) in inv_w.iter().enumerate() {
            sys[(j, j)] = sys[(j, j)] + mu * iw;
        }
        let lambda = psd_solve(&sys, &r)?;
        let d = map.adjoint(&lambda)?.scale(-T::one());

        let current = smoothed(&r, eps, q);
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = x.clone();
            trial.axpy(t, &d);
            if let Some(trial) = retract(&trial, p)? {
                let tr = sub(&map.apply(&trial)?, b);
                if smoothed(&tr, eps, q) < current {
                    accepted = Some((trial, tr));
                    break;
                }
            }
            t = t * T::lit(0.5);
        }
        rel = match accepted {
            Some((next, nr)) => {
                let c = relative_change(&next, &x);
                x = next;
                r = nr;
                c
            }
            None => T::zero(),
        };
        let at_floor = eps <= floor;
        eps_rel = eps_rel * cfg.smoothing_decay;
        eps = (eps_rel * unit).max(floor);
        trace.push(smoothed(&r, eps, q));
        if at_floor && rel <= cfg.tolerance {
            stopped = true;
            break;
        }
    }
    Ok(Run {
        objective: loss(&r, q),
        x,
        trace,
        iterations,
        rel_change: rel,
        stopped,
    })
}
