//! Second, independent transcription of every bound and constant formula,
//! compared with the library on random parameter points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rop_core::certification::*;

pub const POINTS: usize = 1000;

#[derive(Clone, Copy, Debug)]
pub struct Point {
    pub c1: f64,
    pub c2: f64,
    pub k: f64,
    pub p: f64,
    pub q: f64,
    pub l: usize,
    pub r: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub tail: f64,
}

/// Draws a point satisfying the general condition (hence also the exact one).
pub fn point(g: &mut ChaCha8Rng) -> Point {
    loop {
        let q = g.random_range(0.2..=1.0);
        let p = g.random_range(0.2..=1.0) * q;
        let k = g.random_range(2..60) as f64;
        let c1 = g.random_range(0.1..2.0);
        let e = (1.0 / p - 0.5) * q;
        let cap = 2f64.powf(1.0 - q / p) * k.powf(e);
        let kmin = 2f64.powf(2.0 * (q - p) / (q * (2.0 - p)));
        if cap <= 1.0 || k <= kmin {
            continue;
        }
        let ratio = g.random_range(1.0..cap.min(50.0));
        return Point {
            c1,
            c2: c1 * ratio,
            k,
            p,
            q,
            l: g.random_range(5..2000),
            r: g.random_range(1..6),
            eta1: g.random_range(0.0..2.0),
            eta2: g.random_range(0.0..2.0),
            tail: g.random_range(0.0..3.0),
        };
    }
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

// Transcription B, written per displayed statement rather than by shared
// sub-expressions.

fn inv_k(pt: &Point) -> f64 {
    (1.0 / pt.k).powf((1.0 / pt.p - 0.5) * pt.q)
}

fn rho_one(pt: &Point) -> f64 {
    pt.c1 - pt.c2 * inv_k(pt)
}

fn rho_two(pt: &Point) -> f64 {
    pt.c1 - pt.c2 * 2f64.powf(pt.q / pt.p - 1.0) * inv_k(pt)
}

fn r_pow(pt: &Point) -> f64 {
    (pt.r as f64).powf((1.0 / pt.p - 0.5) * pt.q)
}

/// l_q ball alone, exact rank.
pub fn lq_exact_b(pt: &Point) -> f64 {
    2.0 / (rho_one(pt) * (pt.l as f64).powf(1.0 - pt.q)) * (inv_k(pt) + 1.0) * pt.eta1.powf(pt.q)
}

/// Dantzig ball alone, exact rank.
pub fn ds_exact_b(pt: &Point) -> f64 {
    let (p, q) = (pt.p, pt.q);
    2f64.powf(q / p + q) * r_pow(pt) / ((pt.l as f64).powf(q) * rho_one(pt).powi(2))
        * (inv_k(pt) + 1.0)
        * pt.eta2.powf(q)
}

/// Intersection, exact rank.
pub fn both_exact_b(pt: &Point) -> f64 {
    let (p, q) = (pt.p, pt.q);
    let lf = pt.l as f64;
    let a = 2.0 / lf.powf(1.0 - 2.0 * q) * pt.eta1.powf(q);
    let b = 2f64.powf(q / p + q) / rho_one(pt) * r_pow(pt) * pt.eta2.powf(q);
    (inv_k(pt) + 1.0) / (rho_one(pt) * lf.powf(q)) * a.min(b)
}

fn tail_term(pt: &Point) -> f64 {
    (pt.tail / (pt.r as f64).powf(1.0 / pt.p - 0.5)).powf(pt.q)
}

/// l_q ball alone, general matrix.
pub fn lq_general_b(pt: &Point) -> f64 {
    let (p, q) = (pt.p, pt.q);
    let first = (pt.c2 * 2f64.powf(2.0 * q / p - 1.0) / rho_two(pt) * inv_k(pt) + 1.0)
        * (2f64.powf(2.0 * q / p - 1.0) * inv_k(pt) + 1.0)
        * tail_term(pt);
    let second = 2.0 / (rho_two(pt) * (pt.l as f64).powf(1.0 - q))
        * (2f64.powf(q / p - 1.0) * inv_k(pt) + 1.0)
        * pt.eta1.powf(q);
    first + second
}

/// Dantzig ball alone, general matrix.
pub fn ds_general_b(pt: &Point) -> f64 {
    let (p, q) = (pt.p, pt.q);
    let first = (pt.c2 * 2f64.powf(2.0 * q / p) / rho_two(pt) * inv_k(pt) + 1.5)
        * (2f64.powf(2.0 * q / p - 1.0) * inv_k(pt) + 1.0)
        * tail_term(pt);
    let second = 2f64.powf(2.0 * q / p + q + 1.0) * r_pow(pt)
        / ((pt.l as f64).powf(q) * rho_two(pt).powi(2))
        * (2f64.powf(q / p - 1.0) * inv_k(pt) + 1.0)
        * pt.eta2.powf(q);
    first + second
}

/// Intersection, general matrix.
pub fn both_general_b(pt: &Point) -> f64 {
    let (p, q) = (pt.p, pt.q);
    let lf = pt.l as f64;
    let first = (pt.c2 * 2f64.powf(2.0 * q / p - 1.0) / rho_two(pt) * inv_k(pt) + 1.0)
        * (2f64.powf(2.0 * q / p - 1.0) * inv_k(pt) + 1.0)
        * tail_term(pt);
    let a = 2.0 / lf.powf(1.0 - 2.0 * q) * pt.eta1.powf(q);
    let b = 2f64.powf(2.0 * q / p + q + 1.0) / rho_one(pt) * r_pow(pt) * pt.eta2.powf(q);
    first + (2f64.powf(q / p - 1.0) * inv_k(pt) + 1.0) / (rho_two(pt) * lf.powf(q)) * a.min(b)
}

pub fn d1_b(pt: &Point) -> f64 {
    1.0 / (pt.c1 * pt.l as f64).powf(pt.p / pt.q)
}

pub fn beta1_b(pt: &Point) -> f64 {
    (pt.c2 * pt.k.powf(-(1.0 / pt.p - 0.5) * pt.q) / pt.c1).powf(pt.p / pt.q)
}

pub fn d2_b(pt: &Point) -> f64 {
    let (p, q) = (pt.p, pt.q);
    (2f64.powf(q / p + 1.0) / (pt.c1.powf(2.0 * p / q) * (pt.l as f64).powf(p))).powf(p / q)
        * (pt.r as f64).powf((1.0 / p - 0.5) * p)
}

pub fn beta2_b(pt: &Point) -> f64 {
    (2.0 * pt.c2 / (pt.c1 * pt.k.powf((1.0 / pt.p - 0.5) * pt.q)) + 0.5).powf(pt.p / pt.q)
}

pub fn least_q_b(d: f64, beta: f64, p: f64, q: f64, r: usize, tail: f64, z: f64) -> f64 {
    2.0 * (1.0 + beta).powi(2) / (1.0 - beta) * tail.powf(p) / (r as f64).powf((1.0 / p - 0.5) * p)
        + 2f64.powf(p / q) * (3.0 + beta) * d / (1.0 - beta) * z.powf(p)
}

/// Runs every comparison on `POINTS` points; returns the number of points and
/// the first disagreement, if any.
pub fn compare_all(seed: u64) -> Result<usize, String> {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for _ in 0..POINTS {
        let pt = point(&mut g);
        let a = |noise, tail| {
            stability_bound_schatten(pt.c1, pt.c2, pt.k, pt.p, pt.q, pt.l, pt.r, noise, tail)
                .unwrap()
        };
        let cases = [
            (
                "lq exact",
                a(BoundNoise::Lq { eta1: pt.eta1 }, 0.0),
                lq_exact_b(&pt),
            ),
            (
                "ds exact",
                a(BoundNoise::Dantzig { eta2: pt.eta2 }, 0.0),
                ds_exact_b(&pt),
            ),
            (
                "both exact",
                a(
                    BoundNoise::Both {
                        eta1: pt.eta1,
                        eta2: pt.eta2,
                    },
                    0.0,
                ),
                both_exact_b(&pt),
            ),
            (
                "lq general",
                a(BoundNoise::Lq { eta1: pt.eta1 }, pt.tail),
                lq_general_b(&pt),
            ),
            (
                "ds general",
                a(BoundNoise::Dantzig { eta2: pt.eta2 }, pt.tail),
                ds_general_b(&pt),
            ),
            (
                "both general",
                a(
                    BoundNoise::Both {
                        eta1: pt.eta1,
                        eta2: pt.eta2,
                    },
                    pt.tail,
                ),
                both_general_b(&pt),
            ),
        ];
        let n1 = nsp_from_rub(pt.c1, pt.c2, pt.k, pt.p, pt.q, pt.l, pt.r, NspKind::Lq).unwrap();
        let n2 =
            nsp_from_rub(pt.c1, pt.c2, pt.k, pt.p, pt.q, pt.l, pt.r, NspKind::Dantzig).unwrap();
        let beta = beta1_b(&pt);
        let lq = if beta < 1.0 {
            let z = pt.eta1 * pt.l as f64;
            Some((
                stability_bound_least_q(n1.d, n1.beta, pt.p, pt.q, pt.r, pt.tail, z).unwrap(),
                least_q_b(d1_b(&pt), beta, pt.p, pt.q, pt.r, pt.tail, z),
            ))
        } else {
            None
        };
        let consts = [
            ("D1", n1.d, d1_b(&pt)),
            ("beta1", n1.beta, beta),
            ("D2", n2.d, d2_b(&pt)),
            ("beta2", n2.beta, beta2_b(&pt)),
        ];
        for (name, x, y) in cases
            .into_iter()
            .chain(consts)
            .chain(lq.map(|(x, y)| ("least-q", x, y)))
        {
            if !close(x, y) {
                return Err(format!("{name} at {pt:?}: {x} vs {y}"));
            }
        }
        checked += 1;
    }
    Ok(checked)
}
