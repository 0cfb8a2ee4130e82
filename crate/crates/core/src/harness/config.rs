//! `key = value` experiment configuration.
//!
//! One setting per line; `#` starts a comment and blank lines are ignored.
//! Lists are comma separated. Recognized keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `experiment` | `phase_transition`, `bound_check`, `lad_robustness`, `phaselift_demo` | required |
//! | `dims` | list of `MxN` | `16x16` |
//! | `m`, `n` | single `dims` entry; `m` sets both sides, a later `n` changes the second | |
//! | `ranks` | rank grid | `1` |
//! | `L` | measurement counts | |
//! | `ratios` | `L / (r (m + n))` grid, used when `L` is absent | `1,2,3,4,5,6` |
//! | `trials` | trials per cell | `25` |
//! | `threshold` | success threshold on relative Frobenius error | `1e-3` |
//! | `cosine_threshold` | PhaseLift success threshold on the eigenvector cosine | `0.999` |
//! | `method` | `nuclear`, `schatten-p`, `least-q`, `least-squares`, `phaselift` | per experiment |
//! | `p`, `q` | Schatten and residual exponents | `1` |
//! | `noise` | `none`, `lq`, `dantzig`, `both` | `none` |
//! | `eta1`, `eta2` | noise levels; `eta1` may be a list (swept by `bound_check`) | `0` |
//! | `corruption` | list of corrupted fractions | `0` |
//! | `corruption_scale` | outlier size in units of the rms measurement | `10` |
//! | `k` | RUB order multiplier for `bound_check` | `9` |
//! | `rub_trials` | samples per RUB estimate | `200` |
//! | `max_iterations`, `tolerance`, `restarts`, `admm_rho` | solver controls | solver defaults |
//! | `seed` | master seed | `0` |
//! | `output` | CSV path | none |

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Result, RopError};
use crate::measurement::NoiseSpec;
use crate::solvers::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    PhaseTransition,
    BoundCheck,
    LadRobustness,
    PhaseliftDemo,
}

impl FromStr for ExperimentKind {
    type Err = RopError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "phase_transition" => Ok(Self::PhaseTransition),
            "bound_check" => Ok(Self::BoundCheck),
            "lad_robustness" => Ok(Self::LadRobustness),
            "phaselift_demo" => Ok(Self::PhaseliftDemo),
            _ => Err(RopError::Argument(format!("unknown experiment {s:?}"))),
        }
    }
}

/// Recovery program used by an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    Nuclear,
    SchattenP,
    LeastQ,
    LeastSquares,
    PhaseLift,
}

impl MethodChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Nuclear => "nuclear",
            Self::SchattenP => "schatten-p",
            Self::LeastQ => "least-q",
            Self::LeastSquares => "least-squares",
            Self::PhaseLift => "phaselift",
        }
    }

    /// Sphere-constrained programs recover truths normalized in `S_p`.
    pub fn on_sphere(self) -> bool {
        matches!(self, Self::LeastQ | Self::LeastSquares)
    }
}

impl FromStr for MethodChoice {
    type Err = RopError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nuclear" => Ok(Self::Nuclear),
            "schatten-p" | "schatten_p" => Ok(Self::SchattenP),
            "least-q" | "least_q" | "lad" => Ok(Self::LeastQ),
            "least-squares" | "least_squares" => Ok(Self::LeastSquares),
            "phaselift" => Ok(Self::PhaseLift),
            _ => Err(RopError::Argument(format!("unknown method {s:?}"))),
        }
    }
}

/// Measurement budgets, either explicit or as multiples of `r (m + n)`.
#[derive(Clone, Debug, PartialEq)]
pub enum LGrid {
    Counts(Vec<usize>),
    Ratios(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub dims: Vec<(usize, usize)>,
    pub ranks: Vec<usize>,
    pub l_grid: LGrid,
    pub trials: usize,
    pub threshold: f64,
    pub cosine_threshold: f64,
    pub method: MethodChoice,
    pub solver: SolverConfig<f64>,
    pub noise_kind: String,
    pub eta1: Vec<f64>,
    pub eta2: f64,
    pub corruption: Vec<f64>,
    pub corruption_scale: f64,
    pub k: f64,
    pub rub_trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for `kind`.
    pub fn new(kind: ExperimentKind) -> Self {
        let method = match kind {
            ExperimentKind::PhaseTransition | ExperimentKind::BoundCheck => MethodChoice::Nuclear,
            ExperimentKind::LadRobustness => MethodChoice::LeastQ,
            ExperimentKind::PhaseliftDemo => MethodChoice::PhaseLift,
        };
        Self {
            kind,
            dims: vec![(16, 16)],
            ranks: vec![1],
            l_grid: LGrid::Ratios(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            trials: 25,
            threshold: 1e-3,
            cosine_threshold: 0.999,
            method,
            solver: SolverConfig::default(),
            noise_kind: if kind == ExperimentKind::BoundCheck {
                "lq"
            } else {
                "none"
            }
            .into(),
            eta1: vec![0.0],
            eta2: 0.0,
            corruption: vec![0.0],
            corruption_scale: 10.0,
            k: 9.0,
            rub_trials: 200,
            seed: 0,
            output: None,
        }
    }

    /// Parses a configuration file body. Errors name the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_pair(line).map_err(|message| RopError::Parse {
                line: i + 1,
                message,
            })?;
            pairs.push((i + 1, key, value));
        }
        let kind_at = pairs.iter().find(|(_, k, _)| k == "experiment");
        let Some((line, _, kind)) = kind_at else {
            return Err(RopError::Parse {
                line: 0,
                message: "missing `experiment` key".into(),
            });
        };
        let mut cfg = Self::new(kind.parse().map_err(|e: RopError| RopError::Parse {
            line: *line,
            message: e.to_string(),
        })?);
        for (line, key, value) in &pairs {
            if key != "experiment" {
                cfg.set(key, value).map_err(|e| RopError::Parse {
                    line: *line,
                    message: e.to_string(),
                })?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (key, value) = split_pair(pair).map_err(RopError::Argument)?;
        if key == "experiment" {
            let kind: ExperimentKind = value.parse()?;
            if kind != self.kind {
                return Err(RopError::Argument(
                    "the experiment kind cannot be overridden".into(),
                ));
            }
            return Ok(());
        }
        self.set(&key, &value)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dims" => self.dims = parse_list(value, parse_dims)?,
            "m" => {
                let m = parse_one(value)?;
                self.dims = vec![(m, m)];
            }
            "n" => {
                let n = parse_one(value)?;
                let m = self.dims.first().map_or(n, |d| d.0);
                self.dims = vec![(m, n)];
            }
            "ranks" | "r" => self.ranks = parse_list(value, parse_one)?,
            "L" | "l" => self.l_grid = LGrid::Counts(parse_list(value, parse_one)?),
            "ratios" => self.l_grid = LGrid::Ratios(parse_list(value, parse_one)?),
            "trials" => self.trials = parse_one(value)?,
            "threshold" => self.threshold = parse_one(value)?,
            "cosine_threshold" => self.cosine_threshold = parse_one(value)?,
            "method" => self.method = value.parse()?,
            "p" => self.solver.p = parse_one(value)?,
            "q" => self.solver.q = parse_one(value)?,
            "noise" => self.noise_kind = value.to_string(),
            "eta1" => self.eta1 = parse_list(value, parse_one)?,
            "eta2" => self.eta2 = parse_one(value)?,
            "corruption" => self.corruption = parse_list(value, parse_one)?,
            "corruption_scale" => self.corruption_scale = parse_one(value)?,
            "k" => self.k = parse_one(value)?,
            "rub_trials" => self.rub_trials = parse_one(value)?,
            "max_iterations" => self.solver.max_iterations = parse_one(value)?,
            "tolerance" => self.solver.tolerance = parse_one(value)?,
            "restarts" => self.solver.restarts = parse_one(value)?,
            "admm_rho" => self.solver.admm_rho = parse_one(value)?,
            "seed" => self.seed = parse_one(value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(RopError::Argument(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let arg = |msg: String| Err(RopError::Argument(msg));
        if self.dims.is_empty()
            || self.ranks.is_empty()
            || self.eta1.is_empty()
            || self.corruption.is_empty()
        {
            return arg("grids must be nonempty".into());
        }
        match &self.l_grid {
            LGrid::Counts(v) if v.is_empty() => return arg("L grid must be nonempty".into()),
            LGrid::Ratios(v) if v.is_empty() => return arg("ratio grid must be nonempty".into()),
            LGrid::Ratios(v) if v.iter().any(|&x| !(x >= 0.0 && x.is_finite())) => {
                return arg("ratios must be finite and nonnegative".into())
            }
            _ => {}
        }
        if self.trials == 0 {
            return arg("trials must be at least 1".into());
        }
        if let Some(&(m, n)) = self.dims.iter().find(|&&(m, n)| m == 0 || n == 0) {
            return arg(format!("dimensions must be positive, got {m}x{n}"));
        }
        for &(m, n) in &self.dims {
            if let Some(&r) = self.ranks.iter().find(|&&r| r == 0 || r > m.min(n)) {
                return arg(format!("rank {r} outside 1..={} for {m}x{n}", m.min(n)));
            }
        }
        if !(self.threshold > 0.0) || !(self.cosine_threshold > 0.0 && self.cosine_threshold <= 1.0)
        {
            return arg("thresholds must be positive (cosine at most 1)".into());
        }
        if self.corruption.iter().any(|&c| !(0.0..=1.0).contains(&c))
            || !(self.corruption_scale >= 0.0)
        {
            return arg("corruption fractions must lie in [0, 1] with a nonnegative scale".into());
        }
        self.noise_spec(self.eta1[0])?.validate()?;
        if self.eta1.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
            return arg("eta1 values must be finite and nonnegative".into());
        }
        self.solver.validate()?;
        match self.kind {
            ExperimentKind::PhaseTransition if self.method == MethodChoice::PhaseLift => {
                arg("phase_transition does not run phaselift; use phaselift_demo".into())
            }
            ExperimentKind::BoundCheck => {
                if !matches!(
                    self.method,
                    MethodChoice::Nuclear | MethodChoice::SchattenP | MethodChoice::LeastQ
                ) {
                    return arg("bound_check supports nuclear, schatten-p and least-q".into());
                }
                if self.noise_kind == "none" {
                    return arg("bound_check needs an explicit noise model".into());
                }
                if self.method == MethodChoice::LeastQ && self.noise_kind != "lq" {
                    return arg("least-q bound checks use lq noise".into());
                }
                if !(self.k > 1.0) || self.rub_trials == 0 {
                    return arg("bound_check needs k > 1 and rub_trials >= 1".into());
                }
                Ok(())
            }
            ExperimentKind::PhaseliftDemo if self.dims.iter().any(|&(m, n)| m != n) => {
                arg("phaselift_demo needs square dimensions".into())
            }
            _ => Ok(()),
        }
    }

    /// The noise model at level `eta1` (with `q` from the solver settings).
    pub fn noise_spec(&self, eta1: f64) -> Result<NoiseSpec<f64>> {
        let q = self.solver.q;
        Ok(match self.noise_kind.as_str() {
            "none" => NoiseSpec::None,
            "lq" => NoiseSpec::LqBounded { q, eta1 },
            "dantzig" => NoiseSpec::Dantzig { eta2: self.eta2 },
            "both" => NoiseSpec::Intersection {
                q,
                eta1,
                eta2: self.eta2,
            },
            other => return Err(RopError::Argument(format!("unknown noise model {other:?}"))),
        })
    }

    /// `L` values for a cell of size `m x n` and rank `r`.
    pub fn l_values(&self, m: usize, n: usize, r: usize) -> Vec<(usize, Option<f64>)> {
        match &self.l_grid {
            LGrid::Counts(v) => v.iter().map(|&l| (l, None)).collect(),
            LGrid::Ratios(v) => v
                .iter()
                .map(|&x| ((x * (r * (m + n)) as f64).round() as usize, Some(x)))
                .collect(),
        }
    }
}

fn split_pair(line: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| format!("expected `key = value`, found {line:?}"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return Err(format!("expected `key = value`, found {line:?}"));
    }
    Ok((k.to_string(), v.to_string()))
}

fn parse_one<V: FromStr>(s: &str) -> Result<V> {
    s.trim()
        .parse()
        .map_err(|_| RopError::Argument(format!("invalid value {s:?}")))
}

fn parse_list<V>(s: &str, item: impl Fn(&str) -> Result<V>) -> Result<Vec<V>> {
    s.split(',').map(|t| item(t.trim())).collect()
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let (m, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| RopError::Argument(format!("dimensions must look like MxN, got {s:?}")))?;
    Ok((parse_one(m)?, parse_one(n)?))
}
