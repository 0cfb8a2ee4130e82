use serde::{Deserialize, Serialize};

use crate::certification::conditions::{
    check_constants, check_exponents, check_general_condition, rub_exponent, rub_order,
};
use crate::error::{Result, RopError};
use crate::matrix_core::{lp_norm, rank_split, schatten_pow, singular_values, DenseMatrix};
use crate::measurement::LinearMap;
use crate::scalar::Scalar;

/// Which measurement term a robust rank null space property bounds by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NspKind {
    /// `||A(X)||_q`.
    Lq,
    /// `||A*A(X)||_{S_inf}`.
    Dantzig,
}

/// Constants `(D, beta)` of an `(l_t, l_p)` robust rank null space property.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NspConstants<T> {
    pub d: T,
    pub beta: T,
    pub kind: NspKind,
    pub t: T,
    pub p: T,
    pub q: T,
}

impl<T: Scalar> NspConstants<T> {
    /// Downstream error bounds need `beta < 1`.
    pub fn is_valid(&self) -> bool {
        self.beta < T::one()
    }
}

/// RNSP constants implied by `l_q`-RUB constants of order `(k + 1) r`.
///
/// `Lq`: `D = (C1 L)^{-p/q}`, `beta = (C2 / (C1 k^e))^{p/q}`.
/// `Dantzig`: `D = (2^{q/p + 1} / (C1^{2p/q} L^p))^{p/q} r^{(1/p - 1/2) p}`,
/// `beta = (2 C2 / (C1 k^e) + 1/2)^{p/q}`. Here `e = (1/p - 1/2) q` and
/// `t = 2`. The values are returned as computed; check [`NspConstants::is_valid`].
#[allow(clippy::too_many_arguments)]
pub fn nsp_from_rub<T: Scalar>(
    c1: T,
    c2: T,
    k: T,
    p: T,
    q: T,
    l: usize,
    r: usize,
    kind: NspKind,
) -> Result<NspConstants<T>> {
    check_constants(c1, c2, k)?;
    check_exponents(p, q)?;
    if l == 0 || r == 0 {
        return Err(RopError::Argument("L and r must be positive".into()));
    }
    let lf = T::from_usize_lossy(l);
    let e = rub_exponent(p, q);
    let pq = p / q;
    let (d, beta) = match kind {
        NspKind::Lq => ((c1 * lf).powf(-pq), (c2 / (c1 * k.powf(e))).powf(pq)),
        NspKind::Dantzig => {
            let two = T::lit(2.0);
            let inner = two.powf(q / p + T::one()) / (c1.powf(two * pq) * lf.powf(p));
            let d = inner.powf(pq) * T::from_usize_lossy(r).powf((T::one() / p - T::lit(0.5)) * p);
            let beta = (two * c2 / (c1 * k.powf(e)) + T::lit(0.5)).powf(pq);
            (d, beta)
        }
    };
    Ok(NspConstants {
        d,
        beta,
        kind,
        t: T::lit(2.0),
        p,
        q,
    })
}

/// Noise levels entering the Schatten-p stability bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundNoise<T> {
    Lq { eta1: T },
    Dantzig { eta2: T },
    Both { eta1: T, eta2: T },
}

/// Bound on `||X_hat - X||_{S_2}^q` for Schatten-p minimization with residual
/// set `B`, given `l_q`-RUB constants of order `(k + 1) r`.
///
/// `tail_norm = ||X_{-max(r)}||_{S_p}`. With `tail_norm = 0` the exact-rank
/// bound applies (needs `rho1 = C1 - C2 k^{-e} > 0`); otherwise the general
/// bound (needs `rho2 = C1 - C2 2^{q/p - 1} k^{-e} > 0` and the lower limit on
/// `k`). For `Both` the two noise terms enter through a minimum.
#[allow(clippy::too_many_arguments)]
pub fn stability_bound_schatten<T: Scalar>(
    c1: T,
    c2: T,
    k: T,
    p: T,
    q: T,
    l: usize,
    r: usize,
    noise: BoundNoise<T>,
    tail_norm: T,
) -> Result<T> {
    check_constants(c1, c2, k)?;
    check_exponents(p, q)?;
    rub_order(k, r)?;
    if l == 0 {
        return Err(RopError::Argument("L must be positive".into()));
    }
    if !(tail_norm >= T::zero()) {
        return Err(RopError::Argument(format!(
            "tail norm must be nonnegative, got {tail_norm}"
        )));
    }
    let (eta1, eta2) = match noise {
        BoundNoise::Lq { eta1 } => (Some(eta1), None),
        BoundNoise::Dantzig { eta2 } => (None, Some(eta2)),
        BoundNoise::Both { eta1, eta2 } => (Some(eta1), Some(eta2)),
    };
    if eta1.into_iter().chain(eta2).any(|v| !(v >= T::zero())) {
        return Err(RopError::Argument(
            "noise levels must be nonnegative".into(),
        ));
    }
    let two = T::lit(2.0);
    let lf = T::from_usize_lossy(l);
    let rf = T::from_usize_lossy(r);
    let e = rub_exponent(p, q);
    let ik = k.recip().powf(e);
    let rho1 = c1 - c2 * ik;
    let lq_term = eta1.map(|h| two * h.powf(q) / lf.powf(T::one() - two * q));

    if tail_norm == T::zero() {
        if rho1 <= T::zero() {
            return Err(RopError::ConditionViolated(format!(
                "rho1 = C1 - C2 k^(-(1/p-1/2)q) = {rho1} is not positive"
            )));
        }
        let ds_term = eta2.map(|h| two.powf(q / p + q) * rf.powf(e) * h.powf(q) / rho1);
        let noise_min = min_present(lq_term, ds_term);
        return Ok((ik + T::one()) / (rho1 * lf.powf(q)) * noise_min);
    }

    let general = check_general_condition(c1, c2, k, p, q)?;
    let rho2 = c1 - c2 * two.powf(q / p - T::one()) * ik;
    if !general.holds() || rho2 <= T::zero() {
        return Err(RopError::ConditionViolated(format!(
            "general condition fails (ratio ok: {}, k ok: {}, rho2 = {rho2})",
            general.ratio_ok, general.k_ok
        )));
    }
    let tail = (tail_norm / rf.powf(T::one() / p - T::lit(0.5))).powf(q);
    let shape = two.powf(two * q / p - T::one()) * ik + T::one();
    let noise_coef = two.powf(q / p - T::one()) * ik + T::one();
    if let (None, Some(h)) = (eta1, eta2) {
        // Dantzig set alone.
        let tail_coef = c2 * two.powf(two * q / p) / rho2 * ik + T::lit(1.5);
        let noise = two.powf(two * q / p + q + T::one()) * rf.powf(e) / (lf.powf(q) * rho2 * rho2)
            * noise_coef
            * h.powf(q);
        return Ok(tail_coef * shape * tail + noise);
    }
    let tail_coef = c2 * two.powf(two * q / p - T::one()) / rho2 * ik + T::one();
    let ds_term =
        eta2.map(|h| two.powf(two * q / p + q + T::one()) * rf.powf(e) * h.powf(q) / rho1);
    let noise_min = min_present(lq_term, ds_term);
    Ok(tail_coef * shape * tail + noise_coef / (rho2 * lf.powf(q)) * noise_min)
}

fn min_present<T: Scalar>(a: Option<T>, b: Option<T>) -> T {
    match (a, b) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => T::zero(),
    }
}

/// Bound on `||X_hat - X||_{S_2}^p` for least-q on the Schatten-p sphere:
/// `2 (1+b)^2/(1-b) tail^p / r^{(1/p-1/2)p} + 2^{p/q} (3+b) D1/(1-b) ||z||_q^p`.
#[allow(clippy::too_many_arguments)]
pub fn stability_bound_least_q<T: Scalar>(
    d1: T,
    beta1: T,
    p: T,
    q: T,
    r: usize,
    tail_norm: T,
    noise_norm: T,
) -> Result<T> {
    check_exponents(p, q)?;
    if !(beta1 < T::one()) {
        return Err(RopError::ConditionViolated(format!(
            "beta1 = {beta1} is not below 1"
        )));
    }
    if !(beta1 >= T::zero() && d1 >= T::zero() && tail_norm >= T::zero() && noise_norm >= T::zero())
        || r == 0
    {
        return Err(RopError::Argument(
            "constants and norms must be nonnegative, r positive".into(),
        ));
    }
    let one = T::one();
    let rf = T::from_usize_lossy(r);
    let gap = one - beta1;
    let tail = T::lit(2.0) * (one + beta1).powi(2) / gap * tail_norm.powf(p)
        / rf.powf((one / p - T::lit(0.5)) * p);
    let noise = T::lit(2.0).powf(p / q) * (T::lit(3.0) + beta1) * d1 / gap * noise_norm.powf(p);
    Ok(tail + noise)
}

/// `||A(Y - X)||_q` or `||A*A(Y - X)||_{S_inf}`, the measurement term of an
/// RNSP of the given kind.
pub fn nsp_residual_norm<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    nsp: &NspConstants<T>,
    y: &DenseMatrix<T>,
    x: &DenseMatrix<T>,
) -> Result<T> {
    let ar = map.apply(&y.try_sub(x)?)?;
    match nsp.kind {
        NspKind::Lq => Ok(lp_norm(&ar, nsp.q)),
        NspKind::Dantzig => Ok(singular_values(&map.adjoint(&ar)?)?[0]),
    }
}

/// Bound on `||Y - X||_{S_t}^p` from an RNSP with constants `nsp`:
///
/// `(1+b)^2/(1-b) r^{-(1/p - 1/t)p} (||Y||_p^p - ||X||_p^p + 2||X_{-max(r)}||_p^p)
///  + (3+b) D/(1-b) residual^p`.
pub fn nsp_error_bound<T: Scalar>(
    nsp: &NspConstants<T>,
    r: usize,
    y: &DenseMatrix<T>,
    x: &DenseMatrix<T>,
    residual_norm: T,
) -> Result<T> {
    let (p, t, beta) = (nsp.p, nsp.t, nsp.beta);
    if !(beta < T::one()) {
        return Err(RopError::ConditionViolated(format!(
            "beta = {beta} is not below 1"
        )));
    }
    if !(p > T::zero() && p <= t) {
        return Err(RopError::Argument(format!(
            "need 0 < p <= t, got p = {p}, t = {t}"
        )));
    }
    let one = T::one();
    let split = rank_split(x, r)?;
    let gap = schatten_pow(y, p)? - schatten_pow(x, p)? + T::lit(2.0) * split.tail_pow(p);
    let rf = T::from_usize_lossy(r);
    let lead = (one + beta).powi(2) / (one - beta) * rf.powf(-(one / p - one / t) * p) * gap;
    let meas = (T::lit(3.0) + beta) * nsp.d / (one - beta) * residual_norm.powf(p);
    Ok(lead + meas)
}
