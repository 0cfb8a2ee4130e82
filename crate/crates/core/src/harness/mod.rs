//! Batch experiments: phase-transition sweeps, bound verification, LAD
//! robustness and PhaseLift demos.
//!
//! Trial `t` of cell `c` draws everything from seeds derived from
//! `(master seed, c, t)`, so results do not depend on scheduling and each CSV
//! row names the seeds that replay it. Wall time is kept in memory only and
//! never written, which keeps the CSV output byte-identical across reruns.

mod config;
mod experiments;

use std::path::Path;

pub use config::{ExperimentConfig, ExperimentKind, LGrid, MethodChoice};
pub use experiments::{
    constraint_for, planted_phase_vector, planted_truth, run_bound_check, run_experiment,
    run_lad_robustness, run_phase_transition, run_phaselift_demo, TrialSeeds,
};

use crate::error::{Result, RopError};

/// Outcome of one trial of one method.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub cell: usize,
    pub trial: usize,
    pub method: &'static str,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub l: usize,
    pub ratio: Option<f64>,
    pub level: f64,
    pub seeds: TrialSeeds,
    /// Relative Frobenius error; `None` when the trial failed.
    pub error: Option<f64>,
    pub success: bool,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<String>,
    /// Experiment-specific values, aligned with `ExperimentOutput::extra_columns`.
    pub extra: Vec<String>,
    pub wall_time_secs: f64,
}

/// Aggregate of the trials of one cell and method.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub cell: usize,
    pub method: &'static str,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub l: usize,
    pub ratio: Option<f64>,
    pub level: f64,
    pub successes: usize,
    pub trials: usize,
    pub failures: usize,
    /// Failed trials enter the error statistics as `inf`.
    pub mean_error: f64,
    pub median_error: f64,
    pub mean_iterations: f64,
    pub wall_time_secs: f64,
    /// Bound checks only.
    pub certified: Option<usize>,
    pub violations: Option<usize>,
}

impl CellResult {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub extra_columns: Vec<&'static str>,
    pub trials: Vec<TrialRecord>,
    pub cells: Vec<CellResult>,
}

fn opt<V: ToString>(v: Option<V>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn csv_string(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| RopError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| RopError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| RopError::Io(e.to_string()))
}

impl ExperimentOutput {
    /// One row per trial and method.
    pub fn trials_csv(&self) -> Result<String> {
        let mut header: Vec<String> = [
            "cell",
            "trial",
            "method",
            "m",
            "n",
            "r",
            "L",
            "ratio",
            "level",
            "trial_seed",
            "ensemble_seed",
            "truth_seed",
            "noise_seed",
            "error",
            "success",
            "iterations",
            "converged",
            "failure",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(self.extra_columns.iter().map(|s| s.to_string()));
        let rows = self
            .trials
            .iter()
            .map(|t| {
                let mut row = vec![
                    t.cell.to_string(),
                    t.trial.to_string(),
                    t.method.to_string(),
                    t.m.to_string(),
                    t.n.to_string(),
                    t.r.to_string(),
                    t.l.to_string(),
                    t.ratio.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(t.level),
                    t.seeds.trial.to_string(),
                    t.seeds.ensemble.to_string(),
                    t.seeds.truth.to_string(),
                    t.seeds.noise.to_string(),
                    t.error.map(fmt_f64).unwrap_or_default(),
                    t.success.to_string(),
                    t.iterations.to_string(),
                    t.converged.to_string(),
                    t.failure.clone().unwrap_or_default(),
                ];
                row.extend(t.extra.iter().cloned());
                row
            })
            .collect();
        csv_string(header, rows)
    }

    /// One row per cell and method.
    pub fn cells_csv(&self) -> Result<String> {
        let header = [
            "cell",
            "method",
            "m",
            "n",
            "r",
            "L",
            "ratio",
            "level",
            "master_seed",
            "successes",
            "trials",
            "success_rate",
            "failures",
            "mean_error",
            "median_error",
            "mean_iterations",
            "certified",
            "violations",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows = self
            .cells
            .iter()
            .map(|c| {
                vec![
                    c.cell.to_string(),
                    c.method.to_string(),
                    c.m.to_string(),
                    c.n.to_string(),
                    c.r.to_string(),
                    c.l.to_string(),
                    c.ratio.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(c.level),
                    self.master_seed.to_string(),
                    c.successes.to_string(),
                    c.trials.to_string(),
                    fmt_f64(c.success_rate()),
                    c.failures.to_string(),
                    fmt_f64(c.mean_error),
                    fmt_f64(c.median_error),
                    fmt_f64(c.mean_iterations),
                    opt(c.certified),
                    opt(c.violations),
                ]
            })
            .collect();
        csv_string(header, rows)
    }

    /// Writes the per-trial table to `path`.
    pub fn write_trials(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.trials_csv()?)
            .map_err(|e| RopError::Io(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn write_cells(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.cells_csv()?)
            .map_err(|e| RopError::Io(format!("{}: {e}", path.as_ref().display())))
    }

    /// Fraction of certified bound-check trials whose error exceeded the bound.
    pub fn violation_rate(&self) -> Option<f64> {
        let certified: usize = self.cells.iter().filter_map(|c| c.certified).sum();
        let violations: usize = self.cells.iter().filter_map(|c| c.violations).sum();
        (certified > 0).then(|| violations as f64 / certified as f64)
    }
}

/// Median with `NaN`-free input; the mean of the middle pair for even sizes.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    }
}
