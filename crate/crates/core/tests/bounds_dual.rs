//! The library's bound formulas against the second transcription and a few
//! hand-computed values.

mod common;

use common::transcription::{close, compare_all, POINTS};
use rop_core::certification::*;

#[test]
fn transcriptions_agree() {
    assert_eq!(compare_all(2024), Ok(POINTS));
}

#[test]
fn least_q_reference_point() {
    // beta = 0, D = 1, p = q = 1, no tail, ||z||_1 = 1: 2 * 3 * 1 * 1.
    assert_eq!(
        stability_bound_least_q(1.0, 0.0, 1.0, 1.0, 1, 0.0, 1.0).unwrap(),
        6.0
    );
}

#[test]
fn least_q_monotone_in_beta() {
    let vals: Vec<f64> = (0..100)
        .map(|i| stability_bound_least_q(0.3, i as f64 / 100.0, 0.7, 0.9, 2, 0.4, 1.3).unwrap())
        .collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn nsp_error_bound_matches_hand_expansion() {
    use common::low_rank;
    let x = low_rank(6, 5, 3, 1);
    let y = low_rank(6, 5, 2, 2);
    let ens =
        rop_core::measurement::RopEnsemble::<f64>::sample_gaussian(6, 5, 40, false, 3).unwrap();
    let nsp = nsp_from_rub(0.6, 0.9, 9.0, 0.8, 1.0, 40, 1, NspKind::Lq).unwrap();
    let res = nsp_residual_norm(&ens, &nsp, &y, &x).unwrap();
    let got = nsp_error_bound(&nsp, 1, &y, &x, res).unwrap();
    let p = 0.8;
    let sp = |m: &rop_core::matrix_core::DenseMatrix<f64>| {
        rop_core::matrix_core::schatten_pow(m, p).unwrap()
    };
    let tail = rop_core::matrix_core::rank_split(&x, 1).unwrap().tail;
    let b = nsp.beta;
    let want = (1.0 + b).powi(2) / (1.0 - b) / 1f64.powf((1.0 / p - 0.5) * p)
        * (sp(&y) - sp(&x) + 2.0 * sp(&tail))
        + (3.0 + b) * nsp.d / (1.0 - b) * res.powf(p);
    assert!(close(got, want));
    // Y = X with exact rank gives zero, up to the SVD floor raised to the p.
    let x1 = low_rank(6, 5, 1, 4);
    let r0 = nsp_residual_norm(&ens, &nsp, &x1, &x1).unwrap();
    assert!(nsp_error_bound(&nsp, 1, &x1, &x1, r0).unwrap() < 1e-9);
}
