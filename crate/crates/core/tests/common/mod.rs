#![allow(dead_code)]

pub mod lemmas;
pub mod oracle2x2;
pub mod transcription;

use nalgebra::DMatrix;
use rop_core::matrix_core::DenseMatrix;
use rop_core::measurement::rng::{normal_vec, substream};

pub fn gaussian(m: usize, n: usize, seed: u64) -> DenseMatrix<f64> {
    DenseMatrix::from_vec(m, n, normal_vec(&mut substream(seed, 17), m * n)).unwrap()
}

/// Random matrix with rank `r` and unit Frobenius norm.
pub fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> DenseMatrix<f64> {
    let g1 = gaussian(m, r, seed);
    let g2 = gaussian(n, r, seed ^ 0x5555);
    let x = g1.matmul(&g2.transpose()).unwrap();
    let f = x.frobenius_norm();
    x.scale(1.0 / f)
}

pub fn to_na(x: &DenseMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(x.rows(), x.cols(), x.as_slice())
}

pub fn from_na(x: &DMatrix<f64>) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)])
}

/// Singular values from nalgebra, descending.
pub fn na_singular_values(x: &DenseMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(x).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn rel_err(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>) -> f64 {
    a.try_sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}
