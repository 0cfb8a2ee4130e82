//! Matrix inequalities checked case by case. Each function draws one random
//! case from `seed` and returns `Err` with a description on failure.

use rand::Rng;
use rop_core::matrix_core::{
    rank_split, schatten_norm, schatten_pow, singular_values, DenseMatrix,
};
use rop_core::measurement::rng::{substream, SeededRng};

use super::gaussian;

fn rng(seed: u64) -> SeededRng {
    substream(seed, 99)
}

/// Random matrix with a spread-out spectrum (a few dominant directions).
fn spread(m: usize, n: usize, seed: u64) -> DenseMatrix<f64> {
    let g = gaussian(m, n, seed);
    let k = m.min(n);
    let mut out = DenseMatrix::zeros(m, n);
    for i in 0..k {
        let u = gaussian(m, 1, seed.wrapping_add(1000 + i as u64)).into_vec();
        let v = gaussian(n, 1, seed.wrapping_add(2000 + i as u64)).into_vec();
        out.axpy(0.5f64.powi(i as i32), &DenseMatrix::outer(&u, &v));
    }
    out.axpy(0.01, &g);
    out
}

fn block_diag(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>, first: bool) -> DenseMatrix<f64> {
    let (m, n) = (a.rows() + b.rows(), a.cols() + b.cols());
    DenseMatrix::from_fn(m, n, |i, j| {
        if first && i < a.rows() && j < a.cols() {
            a[(i, j)]
        } else if !first && i >= a.rows() && j >= a.cols() {
            b[(i - a.rows(), j - a.cols())]
        } else {
            0.0
        }
    })
}

/// `||X + Y||_q^q = ||X||_q^q + ||Y||_q^q` for `X^T Y = 0`, `X Y^T = 0`.
pub fn schatten_additivity(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let q = [0.3, 0.5, 1.0][r.random_range(0..3)];
    let (a1, b1, a2, b2) = (
        r.random_range(1..6),
        r.random_range(1..6),
        r.random_range(1..6),
        r.random_range(1..6),
    );
    let a = gaussian(a1, b1, seed);
    let b = gaussian(a2, b2, seed ^ 0xABCD);
    let x = block_diag(&a, &b, true);
    let y = block_diag(&a, &b, false);
    let lhs = schatten_pow(&x.try_add(&y).unwrap(), q).unwrap();
    let rhs = schatten_pow(&x, q).unwrap() + schatten_pow(&y, q).unwrap();
    if (lhs - rhs).abs() <= 1e-8 {
        Ok(())
    } else {
        Err(format!("additivity q={q}: {lhs} vs {rhs}"))
    }
}

/// `||X_{-max(r)}||_{S_t} <= ||X||_{S_p} / r^{1/p - 1/t}`.
pub fn stechkin(seed: u64) -> Result<(), String> {
    let mut g = rng(seed);
    let (p, t) = [(0.5, 2.0), (1.0, 2.0), (0.5, 1.0)][g.random_range(0..3)];
    let (m, n) = (g.random_range(1..9), g.random_range(1..9));
    let x = if g.random_bool(0.5) {
        spread(m, n, seed)
    } else {
        gaussian(m, n, seed)
    };
    let r = g.random_range(1..=m.min(n));
    let tail = rank_split(&x, r).unwrap().tail;
    let lhs = schatten_norm(&tail, t).unwrap();
    let rhs = schatten_norm(&x, p).unwrap() / (r as f64).powf(1.0 / p - 1.0 / t);
    if lhs <= rhs * (1.0 + 1e-12) + 1e-14 {
        Ok(())
    } else {
        Err(format!("stechkin p={p} t={t} r={r}: {lhs} > {rhs}"))
    }
}

/// `sum_j |s_j(X)^p - s_j(Y)^p| <= sum_j s_j(X - Y)^p`.
pub fn perturbation(seed: u64) -> Result<(), String> {
    let mut g = rng(seed);
    let p = [0.5, 1.0][g.random_range(0..2)];
    let (m, n) = (g.random_range(1..8), g.random_range(1..8));
    let x = spread(m, n, seed);
    let y = if g.random_bool(0.5) {
        let mut y = x.clone();
        y.axpy(g.random_range(0.001..1.0), &gaussian(m, n, seed ^ 0x77));
        y
    } else {
        gaussian(m, n, seed ^ 0x99)
    };
    let sx = singular_values(&x).unwrap();
    let sy = singular_values(&y).unwrap();
    let lhs: f64 = sx
        .iter()
        .zip(&sy)
        .map(|(a, b)| (a.powf(p) - b.powf(p)).abs())
        .sum();
    let rhs = schatten_pow(&x.try_sub(&y).unwrap(), p).unwrap();
    if lhs <= rhs + 1e-8 {
        Ok(())
    } else {
        Err(format!("perturbation p={p}: {lhs} > {rhs}"))
    }
}

/// `t^{(2-p)/p} (c - k t) <= (p/2) ((2-p)/(2k))^{(2-p)/p} c^{2/p}` on `(0, c/k]`.
pub fn f_max(seed: u64) -> Result<(), String> {
    let mut g = rng(seed);
    let c: f64 = [1.0, 5.0][g.random_range(0..2)];
    let k: f64 = [2.0, 10.0][g.random_range(0..2)];
    let p: f64 = [0.4, 0.7, 1.0][g.random_range(0..3)];
    let e = (2.0 - p) / p;
    let bound = p / 2.0 * ((2.0 - p) / (2.0 * k)).powf(e) * c.powf(2.0 / p);
    // A random point plus the analytic maximizer.
    let ts = [
        g.random_range(f64::MIN_POSITIVE..=1.0) * c / k,
        (2.0 - p) / (2.0 * k) * c,
    ];
    for t in ts {
        let f = t.powf(e) * (c - k * t);
        if f > bound * (1.0 + 1e-12) {
            return Err(format!("f(t) c={c} k={k} p={p} t={t}: {f} > {bound}"));
        }
    }
    Ok(())
}
