//! `min ||Ã(X) - b̃||_1 s.t. X ⪰ 0, tr X = 1` on the debiased operator.
//!
//! ADMM with splitting `Ã X - w = b̃`, `X = Z`: the X-update is the linear
//! solve `(I + Ã*Ã) X = ...`, `w` is soft-thresholded and `Z` is projected
//! onto the spectahedron, so every returned iterate is PSD with unit trace.

use crate::error::Result;
use crate::matrix_core::{spectahedron_project, DenseMatrix};
use crate::measurement::LinearMap;
use crate::scalar::Scalar;
use crate::solvers::admm::Normalized;
use crate::solvers::common::{norm2, relative_change, Run};
use crate::solvers::config::SolverConfig;
use crate::solvers::prox::soft_threshold;

pub(crate) fn phaselift_run<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &[T],
    cfg: &SolverConfig<T>,
    mut on_iterate: impl FnMut(&DenseMatrix<T>),
) -> Result<Run<T>> {
    let gram = map.gram();
    let op = Normalized::new(map, &gram, false)?;
    let s = op.scale();
    let bbar: Vec<T> = b.iter().map(|&v| v / s).collect();
    let tiny = T::min_positive_value();

    let mut z = spectahedron_project(&op.adjoint(&bbar)?)?;
    on_iterate(&z);
    let mut w: Vec<T> = op
        .apply(&z)?
        .iter()
        .zip(&bbar)
        .map(|(&a, &bi)| a - bi)
        .collect();
    let (m, n) = z.shape();
    let mut u1 = DenseMatrix::zeros(m, n);
    let mut u2 = vec![T::zero(); b.len()];
    let mut rho = cfg.admm_rho;
    let bnorm = norm2(&bbar).max(T::one());

    let mut trace = Vec::new();
    let mut rel = T::infinity();
    let mut stopped = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let t: Vec<T> = w
            .iter()
            .zip(&bbar)
            .zip(&u2)
            .map(|((&wi, &bi), &ui)| wi + bi - ui)
            .collect();
        let rhs = &(&z - &u1) + &op.adjoint(&t)?;
        let x = op.solve(&rhs)?;
        let ax = op.apply(&x)?;
        let w_next: Vec<T> = ax
            .iter()
            .zip(&bbar)
            .zip(&u2)
            .map(|((&a, &bi), &ui)| soft_threshold(a - bi + ui, T::one() / rho))
            .collect();
        let z_next = spectahedron_project(&(&x + &u1))?;
        on_iterate(&z_next);

        let r1 = &x - &z_next;
        let r2: Vec<T> = ax
            .iter()
            .zip(&w_next)
            .zip(&bbar)
            .map(|((&a, &wi), &bi)| a - wi - bi)
            .collect();
        let primal = (r1.frobenius_norm().powi(2) + r2.iter().map(|&v| v * v).sum::<T>()).sqrt();
        u1 = &u1 + &r1;
        u2.iter_mut().zip(&r2).for_each(|(u, &r)| *u = *u + r);
        let dz = (&z_next - &z).frobenius_norm();
        let dw = norm2(
            &w_next
                .iter()
                .zip(&w)
                .map(|(&a, &c)| a - c)
                .collect::<Vec<_>>(),
        );
        let dual = rho * (dz * dz + dw * dw).sqrt();

        rel = relative_change(&z_next, &z);
        z = z_next;
        w = w_next;
        let resid = op.apply(&z)?;
        trace.push(
            resid
                .iter()
                .zip(&bbar)
                .map(|(&a, &bi)| (a - bi).abs())
                .sum::<T>()
                * s,
        );

        if rel <= cfg.tolerance && primal <= cfg.tolerance * bnorm {
            stopped = true;
            break;
        }
        if iterations % 10 == 0 {
            let factor = if primal > T::lit(10.0) * dual {
                T::lit(2.0)
            } else if dual > T::lit(10.0) * primal.max(tiny) {
                T::lit(0.5)
            } else {
                T::one()
            };
            if factor != T::one() {
                rho = rho * factor;
                u1 = u1.scale(T::one() / factor);
                u2.iter_mut().for_each(|v| *v = *v / factor);
            }
        }
    }
    let objective = *trace.last().unwrap_or(&T::zero());
    Ok(Run {
        x: z,
        objective,
        trace,
        iterations,
        rel_change: rel,
        stopped,
    })
}
