//! `roprec`: sample ROP ensembles, measure, recover, certify and run batch
//! experiments. See `roprec help <command>`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rop_core::certification::{
    check_exact_condition, check_general_condition, estimate_rub, nsp_from_rub, rip_from_rub,
    rub_order, stability_bound_least_q, stability_bound_schatten, BoundNoise, NspKind,
};
use rop_core::harness::{
    planted_phase_vector, planted_truth, run_experiment, ExperimentConfig, ExperimentKind,
    ExperimentOutput,
};
use rop_core::io::{
    load_ensemble, load_matrix, load_measurements, save_ensemble, save_json, save_matrix,
    save_measurements, ReportSummary,
};
use rop_core::measurement::{generate_noise, gross_corruption, NoiseSpec};
use rop_core::solvers::{
    least_q_minimize, least_squares_sphere, nuclear_norm_baseline, phaselift_lad,
    schatten_p_minimize, ConstraintSpec, SolverConfig,
};
use rop_core::{Ensemble, Matrix, RopError};

#[derive(Parser)]
#[command(
    name = "roprec",
    version,
    about = "Low-rank recovery from rank-one projections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a Gaussian ROP ensemble (and optionally a planted truth).
    Sample(SampleArgs),
    /// Measure a matrix with an ensemble, adding noise or corruptions.
    Measure(MeasureArgs),
    /// Recover a matrix from measurements.
    Recover(RecoverArgs),
    /// Estimate RUB constants and evaluate recovery conditions and bounds.
    Certify(CertifyArgs),
    /// Success rate over an (m, n, r, L) grid.
    PhaseTransition(ExperimentArgs),
    /// Observed error against the certified stability bound.
    BoundCheck(ExperimentArgs),
    /// Least-q against least squares under gross corruptions.
    LadRobustness(ExperimentArgs),
    /// PhaseLift on symmetric ensembles.
    PhaseliftDemo(ExperimentArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long = "L")]
    l: usize,
    #[arg(long)]
    symmetric: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write a planted rank-`rank` truth with unit Frobenius norm.
    #[arg(long, requires = "truth_out")]
    rank: Option<usize>,
    /// Seed of the planted truth (the `truth_seed` column of experiment CSVs).
    #[arg(long, default_value_t = 0)]
    truth_seed: u64,
    /// Normalize the planted truth to unit Schatten-p norm instead.
    #[arg(long)]
    sphere_p: Option<f64>,
    /// Plant `x x^T` with a unit vector `x` (PhaseLift truth) instead.
    #[arg(long)]
    phase: bool,
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseKind {
    None,
    Lq,
    Dantzig,
    Both,
    /// Sparse gross outliers.
    Corrupt,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = NoiseKind::None)]
    noise_kind: NoiseKind,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 0.0)]
    eta1: f64,
    #[arg(long, default_value_t = 0.0)]
    eta2: f64,
    /// Corrupted fraction for `--noise-kind corrupt`.
    #[arg(long, default_value_t = 0.05)]
    fraction: f64,
    /// Outlier size in units of the rms measurement.
    #[arg(long, default_value_t = 10.0)]
    magnitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    SchattenP,
    LeastQ,
    LeastSquares,
    Phaselift,
    Nuclear,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstraintArg {
    Eq,
    Lq,
    Ds,
    Both,
    Sphere,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    measurements: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Defaults to `sphere` for least-q and least squares, `eq` otherwise.
    #[arg(long, value_enum)]
    constraint: Option<ConstraintArg>,
    #[arg(long, default_value_t = 0.0)]
    eta1: f64,
    #[arg(long, default_value_t = 0.0)]
    eta2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Planted truth; adds the relative error to the report.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    eta1: Option<f64>,
    #[arg(long)]
    eta2: Option<f64>,
    /// `||X_{-max(r)}||_{S_p}` of the target.
    #[arg(long, default_value_t = 0.0)]
    tail: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// `key = value` configuration file; built-in defaults when absent.
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable), e.g. `--set trials=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Per-trial CSV; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell summary CSV.
    #[arg(long)]
    cells_out: Option<PathBuf>,
    /// Run in single precision.
    #[arg(long)]
    f32: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(a) => sample(a),
        Command::Measure(a) => measure(a),
        Command::Recover(a) => recover(a),
        Command::Certify(a) => certify(a),
        Command::PhaseTransition(a) => experiment(ExperimentKind::PhaseTransition, a),
        Command::BoundCheck(a) => experiment(ExperimentKind::BoundCheck, a),
        Command::LadRobustness(a) => experiment(ExperimentKind::LadRobustness, a),
        Command::PhaseliftDemo(a) => experiment(ExperimentKind::PhaseliftDemo, a),
    }
}

fn sample(a: SampleArgs) -> Result<()> {
    let ens = Ensemble::sample_gaussian(a.m, a.n, a.l, a.symmetric, a.seed)?;
    save_ensemble(&a.out, &ens)?;
    if let Some(path) = &a.truth_out {
        let truth: Matrix = if a.phase {
            if a.m != a.n {
                bail!("--phase needs m == n");
            }
            let x = planted_phase_vector::<f64>(a.m, a.truth_seed);
            Matrix::outer(&x, &x)
        } else {
            let r = a.rank.context("--truth-out needs --rank (or --phase)")?;
            match a.sphere_p {
                Some(p) => planted_truth(a.m, a.n, r, p, true, a.truth_seed)?,
                None => planted_truth(a.m, a.n, r, 1.0, false, a.truth_seed)?,
            }
        };
        save_matrix(path, &truth)?;
    }
    Ok(())
}

fn measure(a: MeasureArgs) -> Result<()> {
    let ens: Ensemble = load_ensemble(&a.ensemble)?;
    let x: Matrix = load_matrix(&a.matrix)?;
    let clean = ens.measure(&x)?;
    let spec = match a.noise_kind {
        NoiseKind::None | NoiseKind::Corrupt => NoiseSpec::None,
        NoiseKind::Lq => NoiseSpec::LqBounded {
            q: a.q,
            eta1: a.eta1,
        },
        NoiseKind::Dantzig => NoiseSpec::Dantzig { eta2: a.eta2 },
        NoiseKind::Both => NoiseSpec::Intersection {
            q: a.q,
            eta1: a.eta1,
            eta2: a.eta2,
        },
    };
    let b = if matches!(a.noise_kind, NoiseKind::Corrupt) {
        gross_corruption(&clean, a.fraction, a.magnitude, a.seed)?
    } else {
        clean.try_add(&generate_noise(&spec, &ens, a.seed)?)?
    };
    save_measurements(&a.out, &b)?;
    Ok(())
}

fn recover(a: RecoverArgs) -> Result<()> {
    let ens: Ensemble = load_ensemble(&a.ensemble)?;
    let b = load_measurements(&a.measurements)?;
    let truth: Option<Matrix> = a.truth.as_deref().map(load_matrix).transpose()?;
    let mut cfg = SolverConfig::<f64>::default().with_p(a.p).with_q(a.q);
    cfg.seed = a.seed;
    if let Some(v) = a.max_iterations {
        cfg.max_iterations = v;
    }
    if let Some(v) = a.tolerance {
        cfg.tolerance = v;
    }
    if let Some(v) = a.restarts {
        cfg.restarts = v;
    }
    let sphere_method = matches!(a.method, MethodArg::LeastQ | MethodArg::LeastSquares);
    let constraint = a.constraint.unwrap_or(if sphere_method {
        ConstraintArg::Sphere
    } else {
        ConstraintArg::Eq
    });
    let spec = match constraint {
        ConstraintArg::Eq => ConstraintSpec::Equality,
        ConstraintArg::Lq => ConstraintSpec::LqBall {
            q: a.q,
            eta1: a.eta1,
        },
        ConstraintArg::Ds => ConstraintSpec::DantzigBall { eta2: a.eta2 },
        ConstraintArg::Both => ConstraintSpec::Intersection {
            q: a.q,
            eta1: a.eta1,
            eta2: a.eta2,
        },
        ConstraintArg::Sphere => ConstraintSpec::SchattenSphere { p: a.p },
    };
    if sphere_method != (constraint == ConstraintArg::Sphere) && a.method != MethodArg::Phaselift {
        bail!("the sphere constraint goes with least-q and least-squares only");
    }
    let report = match a.method {
        MethodArg::SchattenP => schatten_p_minimize(&ens, &b, &spec, &cfg)?,
        MethodArg::Nuclear => nuclear_norm_baseline(&ens, &b, &spec, &cfg)?,
        MethodArg::LeastQ => least_q_minimize(&ens, &b, &cfg)?,
        MethodArg::LeastSquares => least_squares_sphere(&ens, &b, &cfg)?,
        MethodArg::Phaselift => phaselift_lad(&ens, &b, &cfg)?,
    };
    save_json(&a.out, &ReportSummary::new(&report, truth.as_ref())?)?;
    if let Some(path) = &a.matrix_out {
        save_matrix(path, &report.estimate)?;
    }
    Ok(())
}

/// Value of a bound, or the reason it does not apply.
fn bound_json(v: rop_core::Result<f64>) -> Result<Value> {
    match v {
        Ok(x) => Ok(json!({ "value": x })),
        Err(RopError::ConditionViolated(msg)) => Ok(json!({ "value": null, "violated": msg })),
        Err(e) => Err(e.into()),
    }
}

fn certify(a: CertifyArgs) -> Result<()> {
    use rop_core::measurement::LinearMap;
    let ens: Ensemble = load_ensemble(&a.ensemble)?;
    let order = rub_order(a.k, a.r)?;
    let rub = estimate_rub(&ens, order, a.q, a.trials, a.seed)?;
    let (c1, c2) = (rub.c1_hat, rub.c2_hat);
    let l = ens.len();
    let general = check_general_condition(c1, c2, a.k, a.p, a.q)?;
    let rip = rip_from_rub(c1, c2);
    let nsp = |kind| -> Result<Value> {
        let c = nsp_from_rub(c1, c2, a.k, a.p, a.q, l, a.r, kind)?;
        Ok(json!({ "d": c.d, "beta": c.beta, "valid": c.is_valid() }))
    };
    let mut bounds = BTreeMap::new();
    let noise = match (a.eta1, a.eta2) {
        (Some(eta1), Some(eta2)) => Some(BoundNoise::Both { eta1, eta2 }),
        (Some(eta1), None) => Some(BoundNoise::Lq { eta1 }),
        (None, Some(eta2)) => Some(BoundNoise::Dantzig { eta2 }),
        (None, None) => None,
    };
    if let Some(noise) = noise {
        bounds.insert(
            "schatten",
            bound_json(stability_bound_schatten(
                c1, c2, a.k, a.p, a.q, l, a.r, noise, a.tail,
            ))?,
        );
    }
    if let Some(eta1) = a.eta1 {
        // ||z||_q / L <= eta1 bounds the noise norm by L eta1.
        let c = nsp_from_rub(c1, c2, a.k, a.p, a.q, l, a.r, NspKind::Lq)?;
        let v = stability_bound_least_q(c.d, c.beta, a.p, a.q, a.r, a.tail, eta1 * l as f64);
        bounds.insert("least_q", bound_json(v)?);
    }
    let cert = json!({
        "caveat": "inner estimates: C1_hat >= C1*, C2_hat <= C2*; conditions are optimistic",
        "r": a.r,
        "k": a.k,
        "p": a.p,
        "q": a.q,
        "L": l,
        "rub_order": order,
        "trials": a.trials,
        "seed": a.seed,
        "c1_hat": c1,
        "c2_hat": c2,
        "mean_ratio": rub.mean,
        "exact_condition": check_exact_condition(c1, c2, a.k, a.p, a.q)?,
        "general_condition": {
            "ratio_ok": general.ratio_ok,
            "k_ok": general.k_ok,
            "holds": general.holds(),
        },
        "rip": {
            "delta_lb": rip.delta_lb,
            "delta_sub": rip.delta_sub,
            "lb_negative": rip.lb_negative(),
        },
        "nsp_lq": nsp(NspKind::Lq)?,
        "nsp_dantzig": nsp(NspKind::Dantzig)?,
        "eta1": a.eta1,
        "eta2": a.eta2,
        "tail": a.tail,
        "bounds": bounds,
    });
    save_json(&a.out, &cert)?;
    Ok(())
}

fn load_config(kind: ExperimentKind, a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ExperimentConfig::new(kind),
    };
    if cfg.kind != kind {
        bail!(
            "config describes {:?}, but the command runs {kind:?}",
            cfg.kind
        );
    }
    for pair in &a.overrides {
        cfg.apply_override(pair)
            .with_context(|| format!("--set {pair}"))?;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(out) = &a.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn experiment(kind: ExperimentKind, a: ExperimentArgs) -> Result<()> {
    let cfg = load_config(kind, &a)?;
    let out: ExperimentOutput = if a.f32 {
        run_experiment::<f32>(&cfg)?
    } else {
        run_experiment::<f64>(&cfg)?
    };
    write_or_print(cfg.output.as_deref(), &out.trials_csv()?)?;
    if let Some(p) = &a.cells_out {
        write_or_print(Some(p), &out.cells_csv()?)?;
    }
    for c in &out.cells {
        eprintln!(
            "{} m={} n={} r={} L={} level={}: {}/{} succeeded",
            c.method, c.m, c.n, c.r, c.l, c.level, c.successes, c.trials
        );
    }
    if let Some(rate) = out.violation_rate() {
        eprintln!("violation rate among certified trials: {rate} (optimistic constants)");
    }
    Ok(())
}
