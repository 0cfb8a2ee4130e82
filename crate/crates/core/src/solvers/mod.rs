//! Recovery programs: Schatten-p minimization under residual constraints,
//! least-q on the Schatten-p sphere, the nuclear-norm baseline and PhaseLift.
//!
//! All solvers are deterministic given their inputs and `SolverConfig::seed`.
//! Nonconvex programs (`p < 1`, or the sphere constraint) are run from several
//! starting points: the rescaled adjoint image `A*(b)`, the nuclear-norm
//! solution, and seeded Gaussian matrices. The report keeps every trace.

mod admm;
mod common;
mod config;
mod irls;
mod least_q;
mod phaselift;
mod prox;
mod refine;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use admm::project_lq_ball;
pub use config::{ConstraintSpec, Method, RecoveryReport, SolverConfig};
pub use prox::{prox_pow, soft_threshold};

use crate::error::{Result, RopError};
use crate::matrix_core::{
    schatten_norm, schatten_pow, singular_values, symmetric_eigen, DenseMatrix,
};
use crate::measurement::rng::derive_seed;
use crate::measurement::{
    check_feasible_with_tol, check_measurements, LinearMap, MeasurementVector, NoiseSpec,
    RopEnsemble, DEFAULT_FEASIBILITY_TOL,
};
use crate::scalar::Scalar;
use admm::{admm_run, Normalized};
use common::{adjoint_start, gaussian_start, min_norm_solution, sub, Run};
use irls::irls_run;
use least_q::{least_q_run, retract};
use phaselift::phaselift_run;

fn report_from_runs<T: Scalar>(
    runs: Vec<(Run<T>, bool)>,
    method: Method,
    slack_of: impl Fn(&DenseMatrix<T>) -> Result<(bool, BTreeMap<String, T>)>,
    convex: bool,
) -> Result<RecoveryReport<T>> {
    let mut best: Option<(usize, bool, T)> = None;
    for (i, (run, feasible)) in runs.iter().enumerate() {
        let better = match best {
            None => true,
            Some((_, bf, bo)) => (*feasible && !bf) || (*feasible == bf && run.objective < bo),
        };
        if better {
            best = Some((i, *feasible, run.objective));
        }
    }
    let (idx, _, _) =
        best.ok_or_else(|| RopError::Argument("no starting point available".into()))?;
    let restart_traces: Vec<Vec<T>> = runs.iter().map(|(r, _)| r.trace.clone()).collect();
    let (run, _) = runs.into_iter().nth(idx).expect("index in range");
    let (feasible, constraint_slack) = slack_of(&run.x)?;
    let converged = run.stopped && feasible;
    Ok(RecoveryReport {
        estimate: run.x,
        method,
        iterations_used: run.iterations,
        final_objective: run.objective,
        final_relative_change: run.rel_change,
        constraint_slack,
        feasible,
        converged,
        globally_optimal: convex && converged,
        restart_traces,
        best_restart: idx,
    })
}

/// Feasibility of `b - A(x)` for the residual set, with the tolerance scaled
/// by `max(1, ||b||_inf)` for the equality constraint.
fn residual_slack<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &[T],
    set: &NoiseSpec<T>,
    x: &DenseMatrix<T>,
) -> Result<(bool, BTreeMap<String, T>)> {
    let residual = MeasurementVector::new(sub(b, &map.apply(x)?));
    let mut tol = T::lit(DEFAULT_FEASIBILITY_TOL);
    if matches!(set, NoiseSpec::None) {
        tol = tol * b.iter().fold(T::one(), |a, v| a.max(v.abs()));
    }
    let f = check_feasible_with_tol(set, map, &residual, tol)?;
    let mut slack = BTreeMap::new();
    if let Some(v) = f.equality_residual {
        slack.insert("equality_residual".to_string(), v);
    }
    if let Some(v) = f.lq_slack {
        slack.insert("lq".to_string(), v);
    }
    if let Some(v) = f.dantzig_slack {
        slack.insert("dantzig".to_string(), v);
    }
    Ok((f.feasible, slack))
}

fn zero_report<T: Scalar>(
    m: usize,
    n: usize,
    method: Method,
    slack: BTreeMap<String, T>,
) -> RecoveryReport<T> {
    RecoveryReport {
        estimate: DenseMatrix::zeros(m, n),
        method,
        iterations_used: 0,
        final_objective: T::zero(),
        final_relative_change: T::zero(),
        constraint_slack: slack,
        feasible: true,
        converged: true,
        globally_optimal: true,
        restart_traces: vec![Vec::new()],
        best_restart: 0,
    }
}

fn validate_inputs<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &MeasurementVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<()> {
    cfg.validate()?;
    check_measurements(map, &b.values)?;
    if b.values.iter().any(|v| !v.is_finite()) {
        return Err(RopError::Argument("measurements must be finite".into()));
    }
    if map.is_empty() {
        return Err(RopError::Argument("the map has no measurements".into()));
    }
    Ok(())
}

fn residual_set_of<T: Scalar>(constraint: &ConstraintSpec<T>) -> Result<NoiseSpec<T>> {
    constraint.validate()?;
    constraint.residual_set().ok_or_else(|| {
        RopError::Argument(
            "Schatten-p minimization needs a residual constraint (eq, lq, ds or both)".into(),
        )
    })
}

fn restart_count<T: Scalar>(cfg: &SolverConfig<T>, convex: bool) -> usize {
    if convex {
        1
    } else {
        cfg.restarts.max(1)
    }
}

/// Solves `min ||X||_{S_p}^p subject to b - A(X) ∈ B` with `p = cfg.p`.
///
/// The equality constraint uses IRLS; the noisy sets use ADMM. For `p = 1`
/// a single run is made and, when it converges, the result is flagged as
/// globally optimal. For `p < 1` with the equality constraint the restarts
/// are followed by a rank-descent refinement whose exactly low-rank feasible
/// points join the candidates (their traces have one entry). A zero
/// right-hand side that already lies in `B` returns `X = 0` without iterating.
pub fn schatten_p_minimize<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &MeasurementVector<T>,
    constraint: &ConstraintSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryReport<T>> {
    validate_inputs(map, b, cfg)?;
    let set = residual_set_of(constraint)?;
    if matches!(set, NoiseSpec::None) {
        schatten_irls(map, &b.values, cfg)
    } else {
        schatten_admm(map, &b.values, &set, cfg.p, cfg, Method::SchattenPAdmm)
    }
}

/// Nuclear-norm minimization (`p = 1`) by ADMM for every constraint kind.
pub fn nuclear_norm_baseline<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &MeasurementVector<T>,
    constraint: &ConstraintSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryReport<T>> {
    validate_inputs(map, b, cfg)?;
    let set = residual_set_of(constraint)?;
    schatten_admm(map, &b.values, &set, T::one(), cfg, Method::NuclearAdmm)
}

fn zero_is_feasible<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &[T],
    set: &NoiseSpec<T>,
) -> Result<Option<BTreeMap<String, T>>> {
    let (m, n) = map.input_shape();
    let (ok, slack) = residual_slack(map, b, set, &DenseMatrix::zeros(m, n))?;
    let exact = match set {
        NoiseSpec::None => b.iter().all(|&v| v == T::zero()),
        _ => ok,
    };
    Ok(exact.then_some(slack))
}

fn schatten_irls<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &[T],
    cfg: &SolverConfig<T>,
) -> Result<RecoveryReport<T>> {
    let (m, n) = map.input_shape();
    let set = NoiseSpec::None;
    if let Some(slack) = zero_is_feasible(map, b, &set)? {
        return Ok(zero_report(m, n, Method::SchattenPIrls, slack));
    }
    let gram = map.gram();
    let x_mn = min_norm_solution(map, &gram, b)?;
    let s = singular_values(&x_mn)?[0];
    let scale2 = s * s;
    let convex = cfg.p == T::one();
    let count = restart_count(cfg, convex);
    let first = adjoint_start(map, b)?;
    let inits: Vec<DenseMatrix<T>> = (0..count)
        .map(|i| -> Result<DenseMatrix<T>> {
            match i {
                0 => Ok(first.clone()),
                1 => Ok(irls_run(map, b, T::one(), cfg, &first, scale2)?.x),
                _ => Ok(gaussian_start(
                    m,
                    n,
                    x_mn.frobenius_norm(),
                    derive_seed(cfg.seed, &[i as u64]),
                )),
            }
        })
        .collect::<Result<_>>()?;
    let mut runs: Vec<(Run<T>, bool)> = inits
        .par_iter()
        .map(|init| {
            let run = irls_run(map, b, cfg.p, cfg, init, scale2)?;
            let (feasible, _) = residual_slack(map, b, &set, &run.x)?;
            Ok((run, feasible))
        })
        .collect::<Result<_>>()?;
    if !convex {
        rank_descent(map, b, cfg.p, &mut runs)?;
    }
    report_from_runs(
        runs,
        Method::SchattenPIrls,
        |x| residual_slack(map, b, &set, x),
        convex,
    )
}

/// Appends exactly low-rank feasible candidates found from the best run,
/// descending one rank at a time while the objective improves.
fn rank_descent<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &[T],
    p: T,
    runs: &mut Vec<(Run<T>, bool)>,
) -> Result<()> {
    let Some(refiner) = refine::Refiner::new(map, b) else {
        return Ok(());
    };
    let Some((mut current, mut objective)) = runs
        .iter()
        .filter(|(_, feasible)| *feasible)
        .map(|(r, _)| (r.x.clone(), r.objective))
        .min_by(|a, c| a.1.partial_cmp(&c.1).unwrap_or(std::cmp::Ordering::Equal))
    else {
        return Ok(());
    };
    let (m, n) = map.input_shape();
    let mut j = refine::numerical_rank(&singular_values(&current)?).min(m.min(n) - 1);
    while j >= 1 {
        let (cand, sweeps) = refiner.rank_point(&current, j)?;
        let (feasible, _) = residual_slack(map, b, &NoiseSpec::None, &cand)?;
        if !feasible {
            break;
        }
        let value = schatten_pow(&cand, p)?;
        let run = Run {
            x: cand.clone(),
            objective: value,
            trace: vec![value],
            iterations: sweeps,
            rel_change: T::zero(),
            stopped: true,
        };
        runs.push((run, true));
        if value >= objective {
            break;
        }
        current = cand;
        objective = value;
        j -= 1;
    }
    Ok(())
}

fn schatten_admm<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &[T],
    set: &NoiseSpec<T>,
    p: T,
    cfg: &SolverConfig<T>,
    method: Method,
) -> Result<RecoveryReport<T>> {
    let (m, n) = map.input_shape();
    if let Some(slack) = zero_is_feasible(map, b, set)? {
        return Ok(zero_report(m, n, method, slack));
    }
    let gram = map.gram();
    let op = Normalized::new(map, &gram, set.dantzig_part().is_some())?;
    let bnorm = common::norm2(b);
    let unit = bnorm * (T::from_usize_lossy(m * n) / gram.trace()).sqrt();
    let lq_convex = set.lq_part().is_none_or(|(q, _)| q == T::one());
    let convex = p == T::one() && lq_convex;
    let count = restart_count(cfg, p == T::one());
    let first = adjoint_start(map, b)?;
    let inits: Vec<DenseMatrix<T>> = (0..count)
        .map(|i| -> Result<DenseMatrix<T>> {
            match i {
                0 => Ok(first.clone()),
                1 => Ok(admm_run(&op, b, set, T::one(), cfg, &first, unit)?.x),
                _ => Ok(gaussian_start(
                    m,
                    n,
                    first.frobenius_norm().max(unit),
                    derive_seed(cfg.seed, &[i as u64]),
                )),
            }
        })
        .collect::<Result<_>>()?;
    let runs: Vec<(Run<T>, bool)> = inits
        .par_iter()
        .map(|init| {
            let run = admm_run(&op, b, set, p, cfg, init, unit)?;
            let (feasible, _) = residual_slack(map, b, set, &run.x)?;
            Ok((run, feasible))
        })
        .collect::<Result<_>>()?;
    report_from_runs(runs, method, |x| residual_slack(map, b, set, x), convex)
}

fn sphere_slack<T: Scalar>(x: &DenseMatrix<T>, p: T) -> Result<(bool, BTreeMap<String, T>)> {
    let dev = (schatten_norm(x, p)? - T::one()).abs();
    let mut slack = BTreeMap::new();
    slack.insert("sphere_deviation".to_string(), dev);
    Ok((dev <= T::lit(1e-8), slack))
}

fn sphere_solve<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &[T],
    p: T,
    q: T,
    cfg: &SolverConfig<T>,
    method: Method,
) -> Result<RecoveryReport<T>> {
    let (m, n) = map.input_shape();
    let gram = map.gram();
    let count = cfg.restarts.max(1);
    let mut inits = Vec::with_capacity(count);
    for i in 0..count {
        let start = match i {
            0 => adjoint_start(map, b)?,
            1 => {
                let x_mn = min_norm_solution(map, &gram, b)?;
                let s = singular_values(&x_mn)?[0];
                if s > T::zero() {
                    irls_run(map, b, T::one(), cfg, &x_mn, s * s)?.x
                } else {
                    x_mn
                }
            }
            _ => gaussian_start(m, n, T::one(), derive_seed(cfg.seed, &[i as u64])),
        };
        // Degenerate starts (e.g. b = 0) fall back to a seeded Gaussian.
        let start = match retract(&start, p)? {
            Some(x) => x,
            None => retract(
                &gaussian_start(m, n, T::one(), derive_seed(cfg.seed, &[i as u64, 1])),
                p,
            )?
            .expect("nonzero gaussian"),
        };
        inits.push(start);
    }
    let runs: Vec<(Run<T>, bool)> = inits
        .par_iter()
        .map(|init| {
            let run = least_q_run(map, &gram, b, p, q, cfg, init)?;
            let (feasible, _) = sphere_slack(&run.x, p)?;
            Ok((run, feasible))
        })
        .collect::<Result<_>>()?;
    report_from_runs(runs, method, |x| sphere_slack(x, p), false)
}

/// Solves `min ||A(X) - b||_q^q subject to ||X||_{S_p} = 1` with
/// `0 < p <= q <= 1` taken from `cfg`. `q = 1` is the least absolute
/// deviation estimator.
///
/// The program is nonconvex, so `globally_optimal` is never set. With
/// `b = 0` the minimizers are the sphere points closest to the kernel of `A`;
/// the solver returns a stationary sphere point.
pub fn least_q_minimize<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &MeasurementVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryReport<T>> {
    validate_inputs(map, b, cfg)?;
    if cfg.p > cfg.q {
        return Err(RopError::Argument(format!(
            "least-q needs p <= q, got p = {}, q = {}",
            cfg.p, cfg.q
        )));
    }
    sphere_solve(map, &b.values, cfg.p, cfg.q, cfg, Method::LeastQ)
}

/// Least-squares baseline `min ||A(X) - b||_2^2 subject to ||X||_{S_p} = 1`.
pub fn least_squares_sphere<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &MeasurementVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryReport<T>> {
    validate_inputs(map, b, cfg)?;
    sphere_solve(
        map,
        &b.values,
        cfg.p,
        T::lit(2.0),
        cfg,
        Method::LeastSquaresSphere,
    )
}

/// PhaseLift with an `l_1` loss on the debiased symmetric ensemble:
/// `min ||Ã(X) - b̃||_1 subject to X ⪰ 0, tr X = 1`.
pub fn phaselift_lad<T: Scalar>(
    ens: &RopEnsemble<T>,
    b: &MeasurementVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryReport<T>> {
    phaselift_lad_observed(ens, b, cfg, |_| {})
}

/// [`phaselift_lad`] that hands every projected iterate to `observe`.
pub fn phaselift_lad_observed<T: Scalar>(
    ens: &RopEnsemble<T>,
    b: &MeasurementVector<T>,
    cfg: &SolverConfig<T>,
    observe: impl FnMut(&DenseMatrix<T>),
) -> Result<RecoveryReport<T>> {
    validate_inputs(ens, b, cfg)?;
    let (map, bt) = ens.debias(b)?;
    if map.is_empty() {
        return Err(RopError::Argument(
            "PhaseLift needs at least two measurements".into(),
        ));
    }
    let run = phaselift_run(&map, &bt.values, cfg, observe)?;
    let slack_of = |x: &DenseMatrix<T>| -> Result<(bool, BTreeMap<String, T>)> {
        let eig = symmetric_eigen(x)?;
        let min_eig = eig.values.last().copied().unwrap_or_else(T::zero);
        let dev = (x.trace() - T::one()).abs();
        let mut slack = BTreeMap::new();
        slack.insert("trace_deviation".to_string(), dev);
        slack.insert("min_eigenvalue".to_string(), min_eig);
        let tol = T::lit(1e-8);
        Ok((dev <= tol && min_eig >= -tol, slack))
    };
    report_from_runs(vec![(run, true)], Method::PhaseLiftLad, slack_of, true)
}
