use std::time::Instant;

use rayon::prelude::*;

use crate::certification::{
    estimate_rub, nsp_from_rub, rub_order, stability_bound_least_q, stability_bound_schatten,
    BoundNoise, NspKind,
};
use crate::error::{Result, RopError};
use crate::harness::config::{ExperimentConfig, ExperimentKind, MethodChoice};
use crate::harness::{fmt_f64, median, CellResult, ExperimentOutput, TrialRecord};
use crate::matrix_core::{lp_norm, schatten_norm, symmetric_eigen, DenseMatrix};
use crate::measurement::rng::{derive_seed, normal_vec, substream};
use crate::measurement::{
    generate_noise, gross_corruption, MeasurementVector, NoiseSpec, RopEnsemble,
};
use crate::scalar::Scalar;
use crate::solvers::{
    least_q_minimize, least_squares_sphere, nuclear_norm_baseline, phaselift_lad,
    schatten_p_minimize, ConstraintSpec, RecoveryReport, SolverConfig,
};

/// Seeds of one trial. Every role gets its own stream so a single trial can
/// be replayed piecewise from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialSeeds {
    pub trial: u64,
    pub ensemble: u64,
    pub truth: u64,
    pub noise: u64,
    pub rub: u64,
}

impl TrialSeeds {
    /// Seeds of trial `trial` of cell `cell`.
    pub fn derive(master: u64, cell: usize, trial: usize) -> Self {
        let t = derive_seed(master, &[cell as u64, trial as u64]);
        Self {
            trial: t,
            ensemble: derive_seed(t, &[0]),
            truth: derive_seed(t, &[1]),
            noise: derive_seed(t, &[2]),
            rub: derive_seed(t, &[3]),
        }
    }
}

/// One grid point: dimensions, rank, budget and the swept level (`eta1` for
/// bound checks, the corrupted fraction for robustness and PhaseLift runs).
#[derive(Clone, Copy, Debug, PartialEq)]
struct Cell {
    m: usize,
    n: usize,
    r: usize,
    l: usize,
    ratio: Option<f64>,
    level: f64,
}

fn cells_of(cfg: &ExperimentConfig) -> Vec<Cell> {
    let levels: &[f64] = match cfg.kind {
        ExperimentKind::PhaseTransition | ExperimentKind::BoundCheck => &cfg.eta1,
        ExperimentKind::LadRobustness | ExperimentKind::PhaseliftDemo => &cfg.corruption,
    };
    let ranks: &[usize] = if cfg.kind == ExperimentKind::PhaseliftDemo {
        &[1]
    } else {
        &cfg.ranks
    };
    let mut out = Vec::new();
    for &(m, n) in &cfg.dims {
        for &r in ranks {
            for (l, ratio) in cfg.l_values(m, n, r) {
                for &level in levels {
                    out.push(Cell {
                        m,
                        n,
                        r,
                        l,
                        ratio,
                        level,
                    });
                }
            }
        }
    }
    out
}

fn cast_cfg<T: Scalar>(c: &SolverConfig<f64>, seed: u64) -> SolverConfig<T> {
    SolverConfig {
        p: T::lit(c.p),
        q: T::lit(c.q),
        max_iterations: c.max_iterations,
        tolerance: T::lit(c.tolerance),
        smoothing_epsilon_initial: T::lit(c.smoothing_epsilon_initial),
        smoothing_decay: T::lit(c.smoothing_decay),
        smoothing_floor: T::lit(c.smoothing_floor),
        admm_rho: T::lit(c.admm_rho),
        restarts: c.restarts,
        seed,
    }
}

fn cast_noise<T: Scalar>(s: NoiseSpec<f64>) -> NoiseSpec<T> {
    match s {
        NoiseSpec::None => NoiseSpec::None,
        NoiseSpec::LqBounded { q, eta1 } => NoiseSpec::LqBounded {
            q: T::lit(q),
            eta1: T::lit(eta1),
        },
        NoiseSpec::Dantzig { eta2 } => NoiseSpec::Dantzig { eta2: T::lit(eta2) },
        NoiseSpec::Intersection { q, eta1, eta2 } => NoiseSpec::Intersection {
            q: T::lit(q),
            eta1: T::lit(eta1),
            eta2: T::lit(eta2),
        },
    }
}

/// The residual constraint matching a noise model.
pub fn constraint_for<T: Scalar>(noise: &NoiseSpec<T>) -> ConstraintSpec<T> {
    match *noise {
        NoiseSpec::None => ConstraintSpec::Equality,
        NoiseSpec::LqBounded { q, eta1 } => ConstraintSpec::LqBall { q, eta1 },
        NoiseSpec::Dantzig { eta2 } => ConstraintSpec::DantzigBall { eta2 },
        NoiseSpec::Intersection { q, eta1, eta2 } => ConstraintSpec::Intersection { q, eta1, eta2 },
    }
}

/// Rank-`r` truth with unit Frobenius norm, or unit `S_p` norm for sphere
/// methods.
pub fn planted_truth<T: Scalar>(
    m: usize,
    n: usize,
    r: usize,
    p: T,
    on_sphere: bool,
    seed: u64,
) -> Result<DenseMatrix<T>> {
    let x = crate::certification::sample_rank_r(m, n, r, seed, 0)?;
    if on_sphere {
        let s = schatten_norm(&x, p)?;
        Ok(x.scale(s.recip()))
    } else {
        Ok(x)
    }
}

/// Unit vector `x` with `x x^T` as the PhaseLift truth.
pub fn planted_phase_vector<T: Scalar>(m: usize, seed: u64) -> Vec<T> {
    let x: Vec<T> = normal_vec(&mut substream(seed, 0), m);
    let nrm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
    x.into_iter().map(|v| v / nrm).collect()
}

fn relative_error<T: Scalar>(x: &DenseMatrix<T>, truth: &DenseMatrix<T>) -> Result<f64> {
    Ok((x.try_sub(truth)?.frobenius_norm() / truth.frobenius_norm()).as_f64())
}

fn solve<T: Scalar>(
    method: MethodChoice,
    ens: &RopEnsemble<T>,
    b: &MeasurementVector<T>,
    noise: &NoiseSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryReport<T>> {
    match method {
        MethodChoice::Nuclear => nuclear_norm_baseline(ens, b, &constraint_for(noise), cfg),
        MethodChoice::SchattenP => schatten_p_minimize(ens, b, &constraint_for(noise), cfg),
        MethodChoice::LeastQ => least_q_minimize(ens, b, cfg),
        MethodChoice::LeastSquares => least_squares_sphere(ens, b, cfg),
        MethodChoice::PhaseLift => phaselift_lad(ens, b, cfg),
    }
}

fn base_record(
    idx: usize,
    cell: &Cell,
    trial: usize,
    method: MethodChoice,
    seeds: TrialSeeds,
) -> TrialRecord {
    TrialRecord {
        cell: idx,
        trial,
        method: method.name(),
        m: cell.m,
        n: cell.n,
        r: cell.r,
        l: cell.l,
        ratio: cell.ratio,
        level: cell.level,
        seeds,
        error: None,
        success: false,
        iterations: 0,
        converged: false,
        failure: None,
        extra: Vec::new(),
        wall_time_secs: 0.0,
    }
}

fn fill<T: Scalar>(
    rec: &mut TrialRecord,
    outcome: Result<(RecoveryReport<T>, f64)>,
    threshold: f64,
) {
    match outcome {
        Ok((report, err)) => {
            rec.error = Some(err);
            rec.success = err <= threshold;
            rec.iterations = report.iterations_used;
            rec.converged = report.converged;
        }
        Err(e) => rec.failure = Some(e.to_string()),
    }
}

fn phase_transition_trial<T: Scalar>(
    cfg: &ExperimentConfig,
    idx: usize,
    cell: &Cell,
    trial: usize,
) -> Vec<TrialRecord> {
    let seeds = TrialSeeds::derive(cfg.seed, idx, trial);
    let mut rec = base_record(idx, cell, trial, cfg.method, seeds);
    let scfg = cast_cfg::<T>(&cfg.solver, seeds.trial);
    let outcome = (|| {
        let noise = cast_noise::<T>(cfg.noise_spec(cell.level)?);
        let ens = RopEnsemble::<T>::sample_gaussian(cell.m, cell.n, cell.l, false, seeds.ensemble)?;
        let truth = planted_truth(
            cell.m,
            cell.n,
            cell.r,
            scfg.p,
            cfg.method.on_sphere(),
            seeds.truth,
        )?;
        let b = ens
            .measure(&truth)?
            .try_add(&generate_noise(&noise, &ens, seeds.noise)?)?;
        let report = solve(cfg.method, &ens, &b, &noise, &scfg)?;
        let err = relative_error(&report.estimate, &truth)?;
        Ok((report, err))
    })();
    fill(&mut rec, outcome, cfg.threshold);
    vec![rec]
}

/// Columns added by bound checks.
const BOUND_COLUMNS: [&str; 8] = [
    "rub_seed",
    "c1_hat",
    "c2_hat",
    "certified",
    "bound",
    "observed",
    "violated",
    "note",
];

fn bound_check_trial<T: Scalar>(
    cfg: &ExperimentConfig,
    idx: usize,
    cell: &Cell,
    trial: usize,
) -> Vec<TrialRecord> {
    let seeds = TrialSeeds::derive(cfg.seed, idx, trial);
    let mut rec = base_record(idx, cell, trial, cfg.method, seeds);
    let scfg = cast_cfg::<T>(&cfg.solver, seeds.trial);
    let (p, q) = (scfg.p, scfg.q);
    let mut extra = vec![
        seeds.rub.to_string(),
        String::new(),
        String::new(),
        "false".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ];
    let mut certified = false;
    let mut bound = None;
    let mut truth_fro = 1.0;
    let outcome = (|| {
        let noise = cast_noise::<T>(cfg.noise_spec(cell.level)?);
        let ens = RopEnsemble::<T>::sample_gaussian(cell.m, cell.n, cell.l, false, seeds.ensemble)?;
        let truth = planted_truth(
            cell.m,
            cell.n,
            cell.r,
            p,
            cfg.method.on_sphere(),
            seeds.truth,
        )?;
        truth_fro = truth.frobenius_norm().as_f64();
        let z = generate_noise(&noise, &ens, seeds.noise)?;
        let b = ens.measure(&truth)?.try_add(&z)?;

        let k = T::lit(cfg.k);
        let order = rub_order(k, cell.r)?;
        if order > cell.m.min(cell.n) {
            return Err(RopError::Argument(format!(
                "RUB order (k+1)r = {order} exceeds min(m, n) = {}",
                cell.m.min(cell.n)
            )));
        }
        let rub = estimate_rub(&ens, order, q, cfg.rub_trials, seeds.rub)?;
        extra[1] = fmt_f64(rub.c1_hat.as_f64());
        extra[2] = fmt_f64(rub.c2_hat.as_f64());
        let computed = if cfg.method == MethodChoice::LeastQ {
            let nsp = nsp_from_rub(rub.c1_hat, rub.c2_hat, k, p, q, cell.l, cell.r, NspKind::Lq)?;
            stability_bound_least_q(
                nsp.d,
                nsp.beta,
                p,
                q,
                cell.r,
                T::zero(),
                lp_norm(&z.values, q),
            )
        } else {
            let bn = match noise {
                NoiseSpec::LqBounded { eta1, .. } => BoundNoise::Lq { eta1 },
                NoiseSpec::Dantzig { eta2 } => BoundNoise::Dantzig { eta2 },
                NoiseSpec::Intersection { eta1, eta2, .. } => BoundNoise::Both { eta1, eta2 },
                NoiseSpec::None => {
                    return Err(RopError::Argument("bound checks need a noise model".into()))
                }
            };
            stability_bound_schatten(
                rub.c1_hat,
                rub.c2_hat,
                k,
                p,
                q,
                cell.l,
                cell.r,
                bn,
                T::zero(),
            )
        };
        match computed {
            Ok(v) => {
                certified = true;
                bound = Some(v.as_f64());
            }
            Err(RopError::ConditionViolated(msg)) => extra[7] = msg,
            Err(e) => return Err(e),
        }
        let report = solve(cfg.method, &ens, &b, &noise, &scfg)?;
        let err = relative_error(&report.estimate, &truth)?;
        Ok((report, err))
    })();
    let observed_exp = if cfg.method == MethodChoice::LeastQ {
        cfg.solver.p
    } else {
        cfg.solver.q
    };
    fill(&mut rec, outcome, cfg.threshold);
    extra[3] = certified.to_string();
    if let (Some(bound), Some(err)) = (bound, rec.error) {
        let observed = (err * truth_fro).powf(observed_exp);
        extra[4] = fmt_f64(bound);
        extra[5] = fmt_f64(observed);
        extra[6] = (observed > bound).to_string();
        rec.success = observed <= bound;
    } else {
        rec.success = false;
    }
    if let Some(f) = &rec.failure {
        extra[7] = f.clone();
    }
    rec.extra = extra;
    vec![rec]
}

fn lad_trial<T: Scalar>(
    cfg: &ExperimentConfig,
    idx: usize,
    cell: &Cell,
    trial: usize,
) -> Vec<TrialRecord> {
    let seeds = TrialSeeds::derive(cfg.seed, idx, trial);
    let scfg = cast_cfg::<T>(&cfg.solver, seeds.trial);
    let setup = (|| -> Result<(RopEnsemble<T>, DenseMatrix<T>, MeasurementVector<T>)> {
        let ens = RopEnsemble::<T>::sample_gaussian(cell.m, cell.n, cell.l, false, seeds.ensemble)?;
        let truth = planted_truth(cell.m, cell.n, cell.r, scfg.p, true, seeds.truth)?;
        let clean = ens.measure(&truth)?;
        let b = gross_corruption(
            &clean,
            T::lit(cell.level),
            T::lit(cfg.corruption_scale),
            seeds.noise,
        )?;
        Ok((ens, truth, b))
    })();
    [MethodChoice::LeastQ, MethodChoice::LeastSquares]
        .into_iter()
        .map(|method| {
            let mut rec = base_record(idx, cell, trial, method, seeds);
            let outcome = match &setup {
                Ok((ens, truth, b)) => solve(method, ens, b, &NoiseSpec::None, &scfg)
                    .and_then(|r| relative_error(&r.estimate, truth).map(|e| (r, e))),
                Err(e) => Err(e.clone()),
            };
            fill(&mut rec, outcome, cfg.threshold);
            rec
        })
        .collect()
}

fn phaselift_trial<T: Scalar>(
    cfg: &ExperimentConfig,
    idx: usize,
    cell: &Cell,
    trial: usize,
) -> Vec<TrialRecord> {
    let seeds = TrialSeeds::derive(cfg.seed, idx, trial);
    let mut rec = base_record(idx, cell, trial, MethodChoice::PhaseLift, seeds);
    let scfg = cast_cfg::<T>(&cfg.solver, seeds.trial);
    let mut cosine = None;
    let outcome = (|| {
        let ens = RopEnsemble::<T>::sample_gaussian(cell.m, cell.m, cell.l, true, seeds.ensemble)?;
        let x = planted_phase_vector::<T>(cell.m, seeds.truth);
        let truth = DenseMatrix::outer(&x, &x);
        let clean = ens.measure(&truth)?;
        let b = gross_corruption(
            &clean,
            T::lit(cell.level),
            T::lit(cfg.corruption_scale),
            seeds.noise,
        )?;
        let report = phaselift_lad(&ens, &b, &scfg)?;
        let v = symmetric_eigen(&report.estimate)?.vectors.column(0);
        cosine = Some(
            v.iter()
                .zip(&x)
                .map(|(&a, &b)| a * b)
                .sum::<T>()
                .abs()
                .as_f64(),
        );
        let err = relative_error(&report.estimate, &truth)?;
        Ok((report, err))
    })();
    fill(&mut rec, outcome, cfg.threshold);
    rec.success = cosine.is_some_and(|c| c >= cfg.cosine_threshold);
    rec.extra = vec![cosine.map(fmt_f64).unwrap_or_default()];
    vec![rec]
}

type TrialFn = fn(&ExperimentConfig, usize, &Cell, usize) -> Vec<TrialRecord>;

fn run_with(
    cfg: &ExperimentConfig,
    expected: ExperimentKind,
    trial_fn: TrialFn,
    extra_columns: Vec<&'static str>,
) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if cfg.kind != expected {
        return Err(RopError::Argument(format!(
            "config describes {:?}, not {expected:?}",
            cfg.kind
        )));
    }
    let cells = cells_of(cfg);
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let trials: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let start = Instant::now();
            let mut recs = trial_fn(cfg, c, &cells[c], t);
            let secs = start.elapsed().as_secs_f64();
            for r in &mut recs {
                r.wall_time_secs = secs;
            }
            recs
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let cells = summarize(&trials, expected == ExperimentKind::BoundCheck);
    Ok(ExperimentOutput {
        kind: expected,
        master_seed: cfg.seed,
        extra_columns,
        trials,
        cells,
    })
}

fn summarize(trials: &[TrialRecord], bounds: bool) -> Vec<CellResult> {
    let mut keys: Vec<(usize, &'static str)> = Vec::new();
    for t in trials {
        if !keys.contains(&(t.cell, t.method)) {
            keys.push((t.cell, t.method));
        }
    }
    keys.into_iter()
        .map(|(cell, method)| {
            let group: Vec<&TrialRecord> = trials
                .iter()
                .filter(|t| t.cell == cell && t.method == method)
                .collect();
            let first = group[0];
            let errors: Vec<f64> = group
                .iter()
                .map(|t| t.error.unwrap_or(f64::INFINITY))
                .collect();
            let count = group.len() as f64;
            let certified = group
                .iter()
                .filter(|t| t.extra.get(3).is_some_and(|s| s == "true"))
                .count();
            let violations = group
                .iter()
                .filter(|t| t.extra.get(6).is_some_and(|s| s == "true"))
                .count();
            CellResult {
                cell,
                method,
                m: first.m,
                n: first.n,
                r: first.r,
                l: first.l,
                ratio: first.ratio,
                level: first.level,
                successes: group.iter().filter(|t| t.success).count(),
                trials: group.len(),
                failures: group.iter().filter(|t| t.failure.is_some()).count(),
                mean_error: errors.iter().sum::<f64>() / count,
                median_error: median(&errors),
                mean_iterations: group.iter().map(|t| t.iterations as f64).sum::<f64>() / count,
                wall_time_secs: group.iter().map(|t| t.wall_time_secs).sum(),
                certified: bounds.then_some(certified),
                violations: bounds.then_some(violations),
            }
        })
        .collect()
}

/// Success rate of each `(m, n, r, L, level)` cell when recovering planted
/// rank-`r` truths from Gaussian ROP measurements.
///
/// A trial succeeds when the relative Frobenius error is at most
/// `cfg.threshold`. Solver failures (including `L = 0`) count as failures.
pub fn run_phase_transition<T: Scalar>(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_with(
        cfg,
        ExperimentKind::PhaseTransition,
        phase_transition_trial::<T>,
        Vec::new(),
    )
}

/// Compares the observed error of noisy recovery with the stability bound
/// computed from RUB constants estimated on the same ensemble.
///
/// The estimates are inner estimates, so the certificate is optimistic.
/// Uncertified trials are kept in the table but excluded from the violation
/// statistics. The observed quantity is `||X_hat - X||_F^q` (`^p` for least-q).
pub fn run_bound_check<T: Scalar>(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_with(
        cfg,
        ExperimentKind::BoundCheck,
        bound_check_trial::<T>,
        BOUND_COLUMNS.to_vec(),
    )
}

/// Least-q (LAD for `q = 1`) against least squares on the same sphere, with
/// gross corruptions of the configured fractions.
pub fn run_lad_robustness<T: Scalar>(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_with(
        cfg,
        ExperimentKind::LadRobustness,
        lad_trial::<T>,
        Vec::new(),
    )
}

/// PhaseLift on symmetric ensembles; success is a leading eigenvector with
/// cosine at least `cfg.cosine_threshold` against the planted vector.
pub fn run_phaselift_demo<T: Scalar>(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_with(
        cfg,
        ExperimentKind::PhaseliftDemo,
        phaselift_trial::<T>,
        vec!["cosine"],
    )
}

/// Dispatches on `cfg.kind`.
pub fn run_experiment<T: Scalar>(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.kind {
        ExperimentKind::PhaseTransition => run_phase_transition::<T>(cfg),
        ExperimentKind::BoundCheck => run_bound_check::<T>(cfg),
        ExperimentKind::LadRobustness => run_lad_robustness::<T>(cfg),
        ExperimentKind::PhaseliftDemo => run_phaselift_demo::<T>(cfg),
    }
}
