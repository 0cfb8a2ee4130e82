//! Bounded noise models: `l_q` balls `||z||_q / L <= eta1` and the Dantzig
//! selector set `||A*(z)||_{S_inf} <= eta2`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RopError};
use crate::matrix_core::{lp_norm, singular_values};
use crate::measurement::ensemble::MeasurementVector;
use crate::measurement::map::{check_measurements, LinearMap};
use crate::measurement::rng::{normal_vec, substream};
use crate::scalar::Scalar;

/// Relative tolerance used when deciding feasibility.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec<T> {
    None,
    LqBounded { q: T, eta1: T },
    Dantzig { eta2: T },
    Intersection { q: T, eta1: T, eta2: T },
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let check_q = |q: T| {
            if q > T::zero() && q <= T::one() {
                Ok(())
            } else {
                Err(RopError::Argument(format!("q must lie in (0, 1], got {q}")))
            }
        };
        let check_eta = |e: T| {
            if e >= T::zero() && e.is_finite() {
                Ok(())
            } else {
                Err(RopError::Argument(format!(
                    "noise level must be finite and >= 0, got {e}"
                )))
            }
        };
        match *self {
            NoiseSpec::None => Ok(()),
            NoiseSpec::LqBounded { q, eta1 } => check_q(q).and(check_eta(eta1)),
            NoiseSpec::Dantzig { eta2 } => check_eta(eta2),
            NoiseSpec::Intersection { q, eta1, eta2 } => {
                check_q(q).and(check_eta(eta1)).and(check_eta(eta2))
            }
        }
    }

    pub fn lq_part(&self) -> Option<(T, T)> {
        match *self {
            NoiseSpec::LqBounded { q, eta1 } | NoiseSpec::Intersection { q, eta1, .. } => {
                Some((q, eta1))
            }
            _ => None,
        }
    }

    pub fn dantzig_part(&self) -> Option<T> {
        match *self {
            NoiseSpec::Dantzig { eta2 } | NoiseSpec::Intersection { eta2, .. } => Some(eta2),
            _ => None,
        }
    }
}

/// `||z||_q / L`.
pub fn lq_level<T: Scalar>(z: &[T], q: T) -> T {
    if z.is_empty() {
        return T::zero();
    }
    lp_norm(z, q) / T::from_usize_lossy(z.len())
}

/// `||A*(z)||_{S_inf}`.
pub fn dantzig_level<T: Scalar, M: LinearMap<T> + ?Sized>(map: &M, z: &[T]) -> Result<T> {
    let adj = map.adjoint(z)?;
    Ok(singular_values(&adj)?
        .first()
        .copied()
        .unwrap_or_else(T::zero))
}

/// Draws a standard normal vector and rescales it onto the boundary of the
/// noise set (the tighter boundary for intersections).
pub fn generate_noise<T: Scalar, M: LinearMap<T> + ?Sized>(
    spec: &NoiseSpec<T>,
    map: &M,
    seed: u64,
) -> Result<MeasurementVector<T>> {
    spec.validate()?;
    let l = map.len();
    if matches!(spec, NoiseSpec::None) || l == 0 {
        return Ok(MeasurementVector::zeros(l));
    }
    let z: Vec<T> = normal_vec(&mut substream(seed, u64::MAX), l);
    let mut factor = T::infinity();
    if let Some((q, eta1)) = spec.lq_part() {
        factor = factor.min(eta1 / lq_level(&z, q));
    }
    if let Some(eta2) = spec.dantzig_part() {
        factor = factor.min(eta2 / dantzig_level(map, &z)?);
    }
    Ok(MeasurementVector::new(
        z.into_iter().map(|v| v * factor).collect(),
    ))
}

/// Per-constraint slack (`eta - level`; negative means violated).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Feasibility<T> {
    pub feasible: bool,
    pub lq_slack: Option<T>,
    pub dantzig_slack: Option<T>,
    /// `||residual||_inf`, reported for the equality constraint.
    pub equality_residual: Option<T>,
}

pub fn check_feasible<T: Scalar, M: LinearMap<T> + ?Sized>(
    spec: &NoiseSpec<T>,
    map: &M,
    residual: &MeasurementVector<T>,
) -> Result<Feasibility<T>> {
    check_feasible_with_tol(spec, map, residual, T::lit(DEFAULT_FEASIBILITY_TOL))
}

/// Membership test for `residual ∈ B`; a constraint with level `eta` is met
/// when `level <= eta + tol * max(eta, 1)`. The equality constraint requires
/// `||residual||_inf <= tol`.
pub fn check_feasible_with_tol<T: Scalar, M: LinearMap<T> + ?Sized>(
    spec: &NoiseSpec<T>,
    map: &M,
    residual: &MeasurementVector<T>,
    tol: T,
) -> Result<Feasibility<T>> {
    spec.validate()?;
    check_measurements(map, &residual.values)?;
    let allowance = |eta: T| tol * eta.max(T::one());
    let mut out = Feasibility {
        feasible: true,
        lq_slack: None,
        dantzig_slack: None,
        equality_residual: None,
    };
    if let NoiseSpec::None = spec {
        let r = residual
            .values
            .iter()
            .fold(T::zero(), |a, v| a.max(v.abs()));
        out.equality_residual = Some(r);
        out.feasible = r <= tol;
        return Ok(out);
    }
    if let Some((q, eta1)) = spec.lq_part() {
        let slack = eta1 - lq_level(&residual.values, q);
        out.feasible &= slack >= -allowance(eta1);
        out.lq_slack = Some(slack);
    }
    if let Some(eta2) = spec.dantzig_part() {
        let slack = eta2 - dantzig_level(map, &residual.values)?;
        out.feasible &= slack >= -allowance(eta2);
        out.dantzig_slack = Some(slack);
    }
    Ok(out)
}

/// Adds gross outliers to `ceil(fraction * L)` entries chosen uniformly
/// without replacement. Each corrupted entry is shifted by
/// `± magnitude * rms(b)` with a random sign.
pub fn gross_corruption<T: Scalar>(
    b: &MeasurementVector<T>,
    fraction: T,
    magnitude: T,
    seed: u64,
) -> Result<MeasurementVector<T>> {
    if !(fraction >= T::zero() && fraction <= T::one()) {
        return Err(RopError::Argument(format!(
            "corruption fraction must lie in [0, 1], got {fraction}"
        )));
    }
    if !(magnitude >= T::zero() && magnitude.is_finite()) {
        return Err(RopError::Argument(format!(
            "corruption magnitude must be finite and >= 0, got {magnitude}"
        )));
    }
    let l = b.len();
    let count = (fraction * T::from_usize_lossy(l) - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(l)
        .min(l);
    let mut out = b.clone();
    if count == 0 {
        return Ok(out);
    }
    let rms = (b.values.iter().map(|&v| v * v).sum::<T>() / T::from_usize_lossy(l)).sqrt();
    let shift = magnitude * rms;
    let mut rng = substream(seed, u64::MAX - 1);
    for j in rand::seq::index::sample(&mut rng, l, count) {
        let sign = if rng.random::<bool>() {
            T::one()
        } else {
            -T::one()
        };
        out.values[j] = out.values[j] + sign * shift;
    }
    Ok(out)
}
