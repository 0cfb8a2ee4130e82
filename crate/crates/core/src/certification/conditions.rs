use serde::Serialize;

use crate::error::{Result, RopError};
use crate::scalar::Scalar;

/// `(1/p - 1/2) q`, the exponent that recurs in every condition.
pub fn rub_exponent<T: Scalar>(p: T, q: T) -> T {
    (T::one() / p - T::lit(0.5)) * q
}

pub(crate) fn check_exponents<T: Scalar>(p: T, q: T) -> Result<()> {
    if p > T::zero() && p <= q && q <= T::one() {
        Ok(())
    } else {
        Err(RopError::Argument(format!(
            "need 0 < p <= q <= 1, got p = {p}, q = {q}"
        )))
    }
}

pub(crate) fn check_constants<T: Scalar>(c1: T, c2: T, k: T) -> Result<()> {
    if !(c1 > T::zero()) {
        return Err(RopError::Argument(format!("C1 must be positive, got {c1}")));
    }
    if !(c2 >= T::zero()) {
        return Err(RopError::Argument(format!(
            "C2 must be nonnegative, got {c2}"
        )));
    }
    if !(k > T::one()) {
        return Err(RopError::Argument(format!("k must exceed 1, got {k}")));
    }
    Ok(())
}

/// RUB order `(k + 1) r`, requiring `k > 1` and `k r` a positive integer.
pub fn rub_order<T: Scalar>(k: T, r: usize) -> Result<usize> {
    if !(k > T::one()) {
        return Err(RopError::Argument(format!("k must exceed 1, got {k}")));
    }
    let kr = k * T::from_usize_lossy(r);
    let rounded = kr.round();
    if r == 0 || (kr - rounded).abs() > T::lit(1e-9) * kr.max(T::one()) {
        return Err(RopError::Argument(format!(
            "k r must be a positive integer, got k = {k}, r = {r}"
        )));
    }
    Ok(rounded.to_usize().expect("finite positive") + r)
}

/// Exact-recovery condition `C2 / C1 < k^{(1/p - 1/2) q}`.
pub fn check_exact_condition<T: Scalar>(c1: T, c2: T, k: T, p: T, q: T) -> Result<bool> {
    check_constants(c1, c2, k)?;
    check_exponents(p, q)?;
    Ok(c2 / c1 < k.powf(rub_exponent(p, q)))
}

/// Both parts of the condition for general (not exactly low-rank) matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GeneralCondition {
    /// `C2 / C1 < 2^{1 - q/p} k^{(1/p - 1/2) q}`.
    pub ratio_ok: bool,
    /// `k > 2^{2(q - p) / (q (2 - p))}`.
    pub k_ok: bool,
}

impl GeneralCondition {
    pub fn holds(&self) -> bool {
        self.ratio_ok && self.k_ok
    }
}

pub fn check_general_condition<T: Scalar>(
    c1: T,
    c2: T,
    k: T,
    p: T,
    q: T,
) -> Result<GeneralCondition> {
    check_constants(c1, c2, k)?;
    check_exponents(p, q)?;
    let two = T::lit(2.0);
    let threshold = two.powf(T::one() - q / p) * k.powf(rub_exponent(p, q));
    let k_min = two.powf(two * (q - p) / (q * (two - p)));
    Ok(GeneralCondition {
        ratio_ok: c2 / c1 < threshold,
        k_ok: k > k_min,
    })
}

/// RIP-style constants `delta_lb = 1 - C1`, `delta_sub = C2 - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RipConstants<T> {
    pub delta_lb: T,
    pub delta_sub: T,
}

impl<T: Scalar> RipConstants<T> {
    /// `delta_lb < 0` happens when `C1 > 1`; allowed but outside the usual
    /// reading of a lower isometry defect.
    pub fn lb_negative(&self) -> bool {
        self.delta_lb < T::zero()
    }
}

pub fn rip_from_rub<T: Scalar>(c1: T, c2: T) -> RipConstants<T> {
    RipConstants {
        delta_lb: T::one() - c1,
        delta_sub: c2 - T::one(),
    }
}

/// Inverse of [`rip_from_rub`]: `(C1, C2)`.
pub fn rub_from_rip<T: Scalar>(rip: RipConstants<T>) -> (T, T) {
    (T::one() - rip.delta_lb, T::one() + rip.delta_sub)
}

/// `delta_sub(s + r) + tau delta_lb(r) < tau - 1`.
pub fn check_rip_corollary<T: Scalar>(delta_sub_sr: T, delta_lb_r: T, tau: T) -> Result<bool> {
    if !(tau > T::one()) {
        return Err(RopError::Argument(format!("tau must exceed 1, got {tau}")));
    }
    Ok(delta_sub_sr + tau * delta_lb_r < tau - T::one())
}

/// `s = ceil(r tau^{2p / ((2 - p) q)})`.
pub fn rip_corollary_s<T: Scalar>(r: usize, tau: T, p: T, q: T) -> Result<usize> {
    if !(tau > T::one()) {
        return Err(RopError::Argument(format!("tau must exceed 1, got {tau}")));
    }
    check_exponents(p, q)?;
    let two = T::lit(2.0);
    let s = T::from_usize_lossy(r) * tau.powf(two * p / ((two - p) * q));
    // Guard against values a rounding error above an integer.
    let snapped = s.round();
    let s = if (s - snapped).abs() <= T::lit(1e-12) * s.max(T::one()) {
        snapped
    } else {
        s.ceil()
    };
    Ok(s.to_usize().expect("finite"))
}
