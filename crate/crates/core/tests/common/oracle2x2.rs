//! Brute-force global minimum of `||X||_{S_p}^p` over 2x2 matrices with
//! `A(X) = b` for three measurements.
//!
//! The feasible set is the line `X_p + t N`. Every point of the line is
//! scanned on a dense grid and refined by golden section; the rank-1 points
//! of the line (roots of the determinant, where the concave objective has
//! cusps) are added as candidates.

use nalgebra::{DMatrix, DVector};
use rop_core::matrix_core::{schatten_pow, DenseMatrix};
use rop_core::measurement::{LinearMap, MeasurementVector, RopEnsemble};

use super::{from_na, low_rank};

pub struct Instance {
    pub ens: RopEnsemble<f64>,
    pub b: MeasurementVector<f64>,
    pub truth: DenseMatrix<f64>,
}

pub fn instance(seed: u64) -> Instance {
    let ens = RopEnsemble::sample_gaussian(2, 2, 3, false, seed).unwrap();
    let truth = low_rank(2, 2, 1, seed ^ 0xF00D);
    let b = ens.measure(&truth).unwrap();
    Instance { ens, b, truth }
}

fn line(inst: &Instance) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = DMatrix::from_row_slice(3, 4, inst.ens.explicit(4).unwrap().as_slice());
    let b = DVector::from_column_slice(&inst.b.values);
    let xp = a.clone().pseudo_inverse(1e-14).unwrap() * b;
    // The null space is the right singular vector missing from the row space.
    let full = a.transpose() * &a;
    let eig = full.symmetric_eigen();
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .unwrap();
    let nvec = eig.eigenvectors.column(k).into_owned();
    (
        DMatrix::from_row_slice(2, 2, xp.as_slice()),
        DMatrix::from_row_slice(2, 2, nvec.as_slice()),
    )
}

/// Global minimum of `||X||_{S_p}^p` on the feasible line, and a minimizer.
pub fn brute_force(inst: &Instance, p: f64) -> (f64, DenseMatrix<f64>) {
    let (xp, nv) = line(inst);
    let at = |t: f64| from_na(&(&xp + t * &nv));
    let f = |t: f64| schatten_pow(&at(t), p).unwrap();
    // Beyond |t| > T the objective exceeds f(0).
    let f0 = f(0.0);
    let big_t = (2f64.sqrt() * f0.powf(2.0 / p) + xp.norm()) / nv.norm() + 1.0;
    let steps = 200_000;
    let h = 2.0 * big_t / steps as f64;
    let grid: Vec<(f64, f64)> = (0..=steps)
        .map(|i| -big_t + i as f64 * h)
        .map(|t| (t, f(t)))
        .collect();
    let mut cands: Vec<f64> = Vec::new();
    for w in grid.windows(3) {
        if w[1].1 <= w[0].1 && w[1].1 <= w[2].1 {
            cands.push(golden(&f, w[0].0, w[2].0));
        }
    }
    // det(xp + t nv) = 0 is a quadratic in t.
    let (a0, a1, a2) = {
        let d = |t: f64| {
            let m = &xp + t * &nv;
            m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        };
        let (d0, d1, dm) = (d(0.0), d(1.0), d(-1.0));
        (d0, 0.5 * (d1 - dm), 0.5 * (d1 + dm) - d0)
    };
    let disc = a1 * a1 - 4.0 * a2 * a0;
    if a2.abs() > 1e-300 && disc >= 0.0 {
        let s = disc.sqrt();
        cands.push((-a1 + s) / (2.0 * a2));
        cands.push((-a1 - s) / (2.0 * a2));
    }
    let best = cands
        .into_iter()
        .map(|t| (f(t), t))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .unwrap();
    (best.0, at(best.1))
}

fn golden(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}
