//! Scalar proximal maps used by the singular-value shrinkage steps.

use crate::scalar::Scalar;

/// `argmin_x 1/2 (x - v)^2 + lambda |x|^p` for `p ∈ (0, 1]`, `lambda >= 0`.
///
/// `p = 1` is soft thresholding and `p = 1/2` uses the closed-form half
/// thresholding rule. Other exponents locate the nonzero stationary point by a
/// safeguarded Newton iteration on the convex branch of the objective and
/// compare it against `x = 0`. Ties resolve to zero.
pub fn prox_pow<T: Scalar>(v: T, lambda: T, p: T) -> T {
    let a = v.abs();
    let x = if lambda <= T::zero() {
        a
    } else if p == T::one() {
        (a - lambda).max(T::zero())
    } else if p == T::lit(0.5) {
        half_threshold(a, lambda)
    } else {
        generic_positive(a, lambda, p)
    };
    x.copysign(v)
}

/// Soft thresholding `sign(v) max(|v| - tau, 0)`.
pub fn soft_threshold<T: Scalar>(v: T, tau: T) -> T {
    (v.abs() - tau).max(T::zero()).copysign(v)
}

fn objective<T: Scalar>(x: T, a: T, lambda: T, p: T) -> T {
    let d = x - a;
    T::lit(0.5) * d * d + lambda * x.powf(p)
}

// Half thresholding for `min 1/2 (x-a)^2 + lambda sqrt(x)`; equivalently
// `min (x-a)^2 + mu sqrt(x)` with `mu = 2 lambda`.
fn half_threshold<T: Scalar>(a: T, lambda: T) -> T {
    let mu = T::lit(2.0) * lambda;
    let thresh = T::lit(54f64.powf(1.0 / 3.0) / 4.0) * mu.powf(T::lit(2.0 / 3.0));
    if a <= thresh {
        return T::zero();
    }
    let phi = ((mu / T::lit(8.0)) * (a / T::lit(3.0)).powf(T::lit(-1.5))).acos();
    let two_pi_3 = T::lit(2.0 * std::f64::consts::PI / 3.0);
    let x = T::lit(2.0 / 3.0) * a * (T::one() + (two_pi_3 - T::lit(2.0 / 3.0) * phi).cos());
    // At the exact threshold both branches tie; keep the minimizer.
    if objective(x, a, lambda, T::lit(0.5)) < T::lit(0.5) * a * a {
        x
    } else {
        T::zero()
    }
}

fn generic_positive<T: Scalar>(a: T, lambda: T, p: T) -> T {
    if a == T::zero() {
        return T::zero();
    }
    // h'(x) = x - a + lambda p x^(p-1) is convex and increasing for
    // x >= x_c = (lambda p (1-p))^(1/(2-p)).
    let deriv = |x: T| x - a + lambda * p * x.powf(p - T::one());
    let x_c = (lambda * p * (T::one() - p)).powf((T::lit(2.0) - p).recip());
    if x_c >= a || deriv(x_c) >= T::zero() {
        return T::zero();
    }
    let mut lo = x_c;
    let mut hi = a;
    let mut x = a;
    for _ in 0..100 {
        let g = deriv(x);
        if g.abs() <= T::epsilon() * a {
            break;
        }
        if g > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        let h2 = T::one() + lambda * p * (p - T::one()) * x.powf(p - T::lit(2.0));
        let mut next = x - g / h2;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = T::lit(0.5) * (lo + hi);
        }
        if (next - x).abs() <= T::epsilon() * x {
            x = next;
            break;
        }
        x = next;
    }
    if objective(x, a, lambda, p) < T::lit(0.5) * a * a {
        x
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_min(v: f64, lambda: f64, p: f64) -> f64 {
        let hi = v.abs() * 1.5 + 1.0;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=200_000 {
            let x = -hi + 2.0 * hi * i as f64 / 200_000.0;
            let f = 0.5 * (x - v) * (x - v) + lambda * x.abs().powf(p);
            if f < best.0 {
                best = (f, x);
            }
        }
        best.1
    }

    #[test]
    fn soft_threshold_identities() {
        assert_eq!(prox_pow(3.0, 1.0, 1.0), 2.0);
        assert_eq!(prox_pow(1.0, 1.0, 1.0), 0.0);
        assert_eq!(prox_pow(-2.5, 1.0, 1.0), -1.5);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
    }

    #[test]
    fn matches_grid_search() {
        for &p in &[0.3, 0.5, 2.0 / 3.0, 0.9] {
            for &(v, lambda) in &[(2.0, 0.5), (1.0, 0.8), (-3.0, 1.2), (0.7, 0.1), (0.2, 2.0)] {
                let x = prox_pow(v, lambda, p);
                let g = grid_min(v, lambda, p);
                let obj = |x: f64| 0.5 * (x - v) * (x - v) + lambda * x.abs().powf(p);
                assert!(
                    obj(x) <= obj(g) + 1e-9,
                    "p={p} v={v} lambda={lambda}: {x} vs {g}"
                );
            }
        }
    }

    #[test]
    fn zero_lambda_is_identity() {
        assert_eq!(prox_pow(-1.25, 0.0, 0.5), -1.25);
    }
}
