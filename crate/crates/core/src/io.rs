//! Plain-text file formats.
//!
//! Matrix: first line `m n`, then `m` lines of `n` numbers.
//!
//! Ensemble: first line `ROP m n L symmetric` (`symmetric` is `true`/`false`
//! or `1`/`0`), then `L` lines `beta: <m numbers> gamma: <n numbers>`.
//!
//! Measurements: first line `MEAS L`, then `L` numbers, one per line.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same value, so write-then-read is the identity. Blank lines are
//! ignored on input and every parse error names its 1-based line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Result, RopError};
use crate::matrix_core::DenseMatrix;
use crate::measurement::{MeasurementVector, RopEnsemble};
use crate::scalar::Scalar;
use crate::solvers::{Method, RecoveryReport};

fn perr(line: usize, message: impl Into<String>) -> RopError {
    RopError::Parse {
        line,
        message: message.into(),
    }
}

/// Non-blank lines with their 1-based line numbers.
struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(r: R) -> Self {
        Self {
            inner: r.lines(),
            number: 0,
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, String)> {
        loop {
            self.number += 1;
            match self.inner.next() {
                None => {
                    return Err(perr(
                        self.number,
                        format!("unexpected end of file, expected {what}"),
                    ))
                }
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        return Ok((self.number, line));
                    }
                }
            }
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        for line in self.inner.by_ref() {
            self.number += 1;
            if !line?.trim().is_empty() {
                return Err(perr(self.number, "unexpected trailing content"));
            }
        }
        Ok(())
    }
}

fn parse_num<T: Scalar>(tok: &str, line: usize) -> Result<T> {
    let v: T = tok
        .parse()
        .map_err(|_| perr(line, format!("invalid number {tok:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(perr(line, format!("non-finite number {tok:?}")))
    }
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| perr(line, format!("invalid {what} {tok:?}")))
}

fn parse_nums<T: Scalar>(
    toks: &[&str],
    line: usize,
    expected: usize,
    what: &str,
) -> Result<Vec<T>> {
    if toks.len() != expected {
        return Err(perr(
            line,
            format!("expected {expected} {what} values, found {}", toks.len()),
        ));
    }
    toks.iter().map(|t| parse_num(t, line)).collect()
}

fn fmt_num<T: Scalar>(v: T) -> String {
    format!("{v:?}")
}

fn join<T: Scalar>(values: &[T]) -> String {
    values
        .iter()
        .map(|&v| fmt_num(v))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_matrix<T: Scalar, W: Write>(mut w: W, x: &DenseMatrix<T>) -> Result<()> {
    writeln!(w, "{} {}", x.rows(), x.cols())?;
    for i in 0..x.rows() {
        writeln!(w, "{}", join(x.row(i)))?;
    }
    Ok(())
}

pub fn read_matrix<T: Scalar, R: BufRead>(r: R) -> Result<DenseMatrix<T>> {
    let mut lines = Lines::new(r);
    let (ln, header) = lines.next_line("matrix header `m n`")?;
    let mut toks = header.split_whitespace();
    let m = parse_usize(toks.next(), ln, "row count")?;
    let n = parse_usize(toks.next(), ln, "column count")?;
    if toks.next().is_some() {
        return Err(perr(ln, "matrix header has extra fields"));
    }
    if m == 0 || n == 0 {
        return Err(perr(ln, "matrix dimensions must be positive"));
    }
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m {
        let (ln, line) = lines.next_line("matrix row")?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        data.extend(parse_nums::<T>(&toks, ln, n, "row")?);
    }
    lines.expect_end()?;
    DenseMatrix::from_vec(m, n, data)
}

pub fn write_ensemble<T: Scalar, W: Write>(mut w: W, ens: &RopEnsemble<T>) -> Result<()> {
    use crate::measurement::LinearMap;
    writeln!(
        w,
        "ROP {} {} {} {}",
        ens.m(),
        ens.n(),
        ens.len(),
        ens.is_symmetric()
    )?;
    for (b, g) in ens.betas().iter().zip(ens.gammas()) {
        writeln!(w, "beta: {} gamma: {}", join(b), join(g))?;
    }
    Ok(())
}

pub fn read_ensemble<T: Scalar, R: BufRead>(r: R) -> Result<RopEnsemble<T>> {
    let mut lines = Lines::new(r);
    let (ln, header) = lines.next_line("ensemble header `ROP m n L symmetric`")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.first() != Some(&"ROP") {
        return Err(perr(ln, "ensemble header must start with `ROP`"));
    }
    if toks.len() != 5 {
        return Err(perr(ln, "ensemble header must be `ROP m n L symmetric`"));
    }
    let m = parse_usize(Some(toks[1]), ln, "m")?;
    let n = parse_usize(Some(toks[2]), ln, "n")?;
    let l = parse_usize(Some(toks[3]), ln, "L")?;
    let symmetric = match toks[4] {
        "true" | "1" => true,
        "false" | "0" => false,
        other => return Err(perr(ln, format!("invalid symmetric flag {other:?}"))),
    };
    if m == 0 || n == 0 {
        return Err(perr(ln, "ensemble dimensions must be positive"));
    }
    if symmetric && m != n {
        return Err(perr(ln, "symmetric ensemble needs m == n"));
    }
    let mut betas = Vec::with_capacity(l);
    let mut gammas = Vec::with_capacity(l);
    for _ in 0..l {
        let (ln, line) = lines.next_line("ensemble row `beta: ... gamma: ...`")?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let split = toks.iter().position(|&t| t == "gamma:");
        let (Some(&"beta:"), Some(g)) = (toks.first(), split) else {
            return Err(perr(ln, "ensemble row must be `beta: ... gamma: ...`"));
        };
        let beta = parse_nums::<T>(&toks[1..g], ln, m, "beta")?;
        let gamma = parse_nums::<T>(&toks[g + 1..], ln, n, "gamma")?;
        if symmetric && beta != gamma {
            return Err(perr(ln, "symmetric ensemble row has gamma != beta"));
        }
        betas.push(beta);
        gammas.push(gamma);
    }
    lines.expect_end()?;
    if symmetric {
        RopEnsemble::new_symmetric(m, betas)
    } else {
        RopEnsemble::new(m, n, betas, gammas)
    }
}

pub fn write_measurements<T: Scalar, W: Write>(mut w: W, b: &MeasurementVector<T>) -> Result<()> {
    writeln!(w, "MEAS {}", b.len())?;
    for &v in &b.values {
        writeln!(w, "{}", fmt_num(v))?;
    }
    Ok(())
}

pub fn read_measurements<T: Scalar, R: BufRead>(r: R) -> Result<MeasurementVector<T>> {
    let mut lines = Lines::new(r);
    let (ln, header) = lines.next_line("measurement header `MEAS L`")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.first() != Some(&"MEAS") || toks.len() != 2 {
        return Err(perr(ln, "measurement header must be `MEAS L`"));
    }
    let l = parse_usize(Some(toks[1]), ln, "L")?;
    let mut values = Vec::with_capacity(l);
    for _ in 0..l {
        let (ln, line) = lines.next_line("measurement value")?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        values.extend(parse_nums::<T>(&toks, ln, 1, "measurement")?);
    }
    lines.expect_end()?;
    Ok(MeasurementVector::new(values))
}

/// Serializable summary of a [`RecoveryReport`] (everything but the estimate,
/// which goes to its own matrix file).
#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    pub method: Method,
    pub objective: f64,
    pub iterations: usize,
    pub final_relative_change: f64,
    pub converged: bool,
    pub feasible: bool,
    pub globally_optimal: bool,
    pub slack: std::collections::BTreeMap<String, f64>,
    pub best_restart: usize,
    /// Last trace value of every restart.
    pub restart_final_objectives: Vec<Option<f64>>,
    pub rank: usize,
    /// `||X_hat - X0||_F / ||X0||_F` when a truth matrix is known.
    pub relative_error: Option<f64>,
}

impl ReportSummary {
    pub fn new<T: Scalar>(
        report: &RecoveryReport<T>,
        truth: Option<&DenseMatrix<T>>,
    ) -> Result<Self> {
        let relative_error = match truth {
            Some(x0) => {
                let diff = report.estimate.try_sub(x0)?.frobenius_norm();
                let base = x0.frobenius_norm();
                Some(if base > T::zero() { diff / base } else { diff }.as_f64())
            }
            None => None,
        };
        Ok(Self {
            method: report.method,
            objective: report.final_objective.as_f64(),
            iterations: report.iterations_used,
            final_relative_change: report.final_relative_change.as_f64(),
            converged: report.converged,
            feasible: report.feasible,
            globally_optimal: report.globally_optimal,
            slack: report
                .constraint_slack
                .iter()
                .map(|(k, v)| (k.clone(), v.as_f64()))
                .collect(),
            best_restart: report.best_restart,
            restart_final_objectives: report
                .restart_traces
                .iter()
                .map(|t| t.last().map(|v| v.as_f64()))
                .collect(),
            rank: crate::matrix_core::numerical_rank(&report.estimate, T::lit(1e-6))?,
            relative_error,
        })
    }
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<S: Serialize, W: Write>(mut w: W, value: &S) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| RopError::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| RopError::Io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| RopError::Io(format!("{}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub fn load_matrix<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseMatrix<T>> {
    read_matrix(open(path.as_ref())?)
}

pub fn save_matrix<T: Scalar>(path: impl AsRef<Path>, x: &DenseMatrix<T>) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_matrix(&mut w, x)?;
    finish(w)
}

pub fn load_ensemble<T: Scalar>(path: impl AsRef<Path>) -> Result<RopEnsemble<T>> {
    read_ensemble(open(path.as_ref())?)
}

pub fn save_ensemble<T: Scalar>(path: impl AsRef<Path>, ens: &RopEnsemble<T>) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_ensemble(&mut w, ens)?;
    finish(w)
}

pub fn load_measurements<T: Scalar>(path: impl AsRef<Path>) -> Result<MeasurementVector<T>> {
    read_measurements(open(path.as_ref())?)
}

pub fn save_measurements<T: Scalar>(
    path: impl AsRef<Path>,
    b: &MeasurementVector<T>,
) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_measurements(&mut w, b)?;
    finish(w)
}

pub fn save_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_json(&mut w, value)?;
    finish(w)
}
