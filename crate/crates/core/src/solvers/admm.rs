//! ADMM for `min ||X||_{S_p}^p s.t. b - A(X) ∈ B`.
//!
//! Splitting (all in normalized units, see [`Normalized`]):
//!
//! ```text
//! X - Z = 0,   A X + w - b = 0,   A*A X + Y - A*b = 0
//! ```
//!
//! with `Z` carrying the Schatten-p term, `w` the `l_q` ball (or `{0}` for the
//! equality constraint) and `Y` the Dantzig ball. The third block is present
//! only when a Dantzig constraint is. The X-update is a linear solve with
//! `I + A*A (+ (A*A)^2)`, done through the `L × L` Gram matrix.

use crate::error::Result;
use crate::matrix_core::{project_simplex, schatten_pow, singular_values, Cholesky, DenseMatrix};
use crate::measurement::{LinearMap, NoiseSpec};
use crate::scalar::Scalar;
use crate::solvers::common::{norm2, psd_solve, spectral_map, spectral_radius, Run};
use crate::solvers::config::SolverConfig;
use crate::solvers::prox::prox_pow;

/// Relative slack by which the stopping iterate must meet the constraint.
const STOP_MARGIN: f64 = 1e-7;

/// The map rescaled so that `||A||_op <= 1`, with the factored X-update.
pub(crate) struct Normalized<'a, T, M: ?Sized> {
    map: &'a M,
    s: T,
    kbar: DenseMatrix<T>,
    chol: Cholesky<T>,
    dantzig: bool,
}

impl<'a, T: Scalar, M: LinearMap<T> + ?Sized> Normalized<'a, T, M> {
    pub(crate) fn new(map: &'a M, gram: &DenseMatrix<T>, dantzig: bool) -> Result<Self> {
        let s2 = spectral_radius(gram);
        let s2 = if s2 > T::zero() { s2 } else { T::one() };
        let kbar = gram.scale(T::one() / s2);
        let l = kbar.rows();
        let mut sys = kbar.clone();
        if dantzig {
            sys = &sys + &kbar.matmul(&kbar)?;
        }
        for i in 0..l {
            sys[(i, i)] = sys[(i, i)] + T::one();
        }
        let chol = Cholesky::new(&sys)?;
        Ok(Self {
            map,
            s: s2.sqrt(),
            kbar,
            chol,
            dantzig,
        })
    }

    pub(crate) fn scale(&self) -> T {
        self.s
    }

    pub(crate) fn apply(&self, x: &DenseMatrix<T>) -> Result<Vec<T>> {
        Ok(self.map.apply(x)?.into_iter().map(|v| v / self.s).collect())
    }

    pub(crate) fn adjoint(&self, z: &[T]) -> Result<DenseMatrix<T>> {
        Ok(self.map.adjoint(z)?.scale(T::one() / self.s))
    }

    /// `(I + A*A + [A*A]^2)^{-1} v` by the Woodbury identity.
    pub(crate) fn solve(&self, v: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let mut u = self.apply(v)?;
        if self.dantzig {
            let ku = self.kbar.matvec(&u)?;
            u.iter_mut().zip(ku).for_each(|(a, b)| *a = *a + b);
        }
        let t = self.chol.solve(&u);
        let correction = self.adjoint(&t)?;
        Ok(v - &correction)
    }

    /// `z + A*(lambda)` with the smallest correction that makes the residual
    /// `bbar - A z` vanish on the indices where `w` is zero.
    fn zero_residual_where(
        &self,
        bbar: &[T],
        w: &[T],
        z: &DenseMatrix<T>,
    ) -> Result<DenseMatrix<T>> {
        let idx: Vec<usize> = (0..w.len()).filter(|&i| w[i] == T::zero()).collect();
        if idx.is_empty() {
            return Ok(z.clone());
        }
        let az = self.apply(z)?;
        let r: Vec<T> = idx.iter().map(|&i| bbar[i] - az[i]).collect();
        let g = DenseMatrix::from_fn(idx.len(), idx.len(), |a, c| self.kbar[(idx[a], idx[c])]);
        let lambda = psd_solve(&g, &r)?;
        let mut full = vec![T::zero(); w.len()];
        for (a, &i) in idx.iter().enumerate() {
            full[i] = lambda[a];
        }
        Ok(z + &self.adjoint(&full)?)
    }
}

/// Projection onto `{w : ||w||_q <= radius}`. Exact for `q = 1`; for `q < 1`
/// the ball is nonconvex and the coordinatewise thresholding level is found by
/// bisection.
pub fn project_lq_ball<T: Scalar>(v: &[T], q: T, radius: T) -> Vec<T> {
    if radius <= T::zero() {
        return vec![T::zero(); v.len()];
    }
    let qsum = |w: &[T]| w.iter().map(|x| x.abs().powf(q)).sum::<T>();
    let budget = radius.powf(q);
    if qsum(v) <= budget {
        return v.to_vec();
    }
    if q == T::one() {
        let mags: Vec<T> = v.iter().map(|x| x.abs()).collect();
        return project_simplex(&mags, radius)
            .into_iter()
            .zip(v)
            .map(|(a, &x)| a.copysign(x))
            .collect();
    }
    let shrink = |mu: T| -> Vec<T> { v.iter().map(|&x| prox_pow(x, mu, q)).collect() };
    let mut lo = T::zero();
    let mut hi = T::one();
    while qsum(&shrink(hi)) > budget {
        hi = hi * T::lit(2.0);
    }
    for _ in 0..100 {
        let mid = T::lit(0.5) * (lo + hi);
        if qsum(&shrink(mid)) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shrink(hi)
}

fn spectral_clip<T: Scalar>(x: &DenseMatrix<T>, radius: T) -> Result<DenseMatrix<T>> {
    Ok(spectral_map(x, |s| s.min(radius))?.0)
}

fn add_assign<T: Scalar>(a: &mut [T], b: &[T]) {
    a.iter_mut().zip(b).for_each(|(x, &y)| *x = *x + y);
}

fn sq<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum()
}

/// One ADMM run. `init` is in original units; `set` is the residual set `B`.
pub(crate) fn admm_run<T: Scalar, M: LinearMap<T> + ?Sized>(
    op: &Normalized<'_, T, M>,
    b: &[T],
    set: &NoiseSpec<T>,
    p: T,
    cfg: &SolverConfig<T>,
    init: &DenseMatrix<T>,
    unit: T,
) -> Result<Run<T>> {
    let s = op.scale();
    let l = b.len();
    let bbar: Vec<T> = b.iter().map(|&v| v / (s * unit)).collect();
    let lq = set
        .lq_part()
        .map(|(q, eta1)| (q, eta1 * T::from_usize_lossy(l) / (s * unit)));
    let ds = set.dantzig_part().map(|eta2| eta2 / (s * s * unit));
    let equality = matches!(set, NoiseSpec::None);
    let project_w = |v: Vec<T>| -> Vec<T> {
        if equality {
            vec![T::zero(); v.len()]
        } else if let Some((q, radius)) = lq {
            project_lq_ball(&v, q, radius)
        } else {
            v
        }
    };
    let atb = op.adjoint(&bbar)?;
    let bnorm = norm2(&bbar).max(atb.frobenius_norm());
    // The returned iterate is Z, which meets the constraint only up to the
    // primal residual; stopping also asks Z itself to lie in the set.
    let margin = T::one() + T::lit(STOP_MARGIN);
    // For q < 1 the quasi-norm has a cusp at zero, so residual entries of
    // size 1e-9 where w vanishes already break the ball.
    let sparse_ball = lq.is_some_and(|(q, _)| q < T::one());
    let binf = bbar.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let meets_set = |z: &DenseMatrix<T>| -> Result<bool> {
        let az = op.apply(z)?;
        let res: Vec<T> = bbar.iter().zip(&az).map(|(&bi, &a)| bi - a).collect();
        if equality {
            return Ok(res.iter().all(|v| v.abs() <= T::lit(STOP_MARGIN) * binf));
        }
        if let Some((q, radius)) = lq {
            if res
                .iter()
                .map(|v| v.abs().powf(q))
                .sum::<T>()
                .powf(T::one() / q)
                > radius * margin
            {
                return Ok(false);
            }
        }
        if let Some(radius) = ds {
            let g = op.adjoint(&res)?;
            if singular_values(&g)?[0] > radius * margin {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut z = init.scale(T::one() / unit);
    let mut x = z.clone();
    let ax0 = op.apply(&x)?;
    let mut w = project_w(bbar.iter().zip(&ax0).map(|(&bi, &a)| bi - a).collect());
    let mut y = match ds {
        Some(radius) => spectral_clip(&(&atb - &op.adjoint(&ax0)?), radius)?,
        None => DenseMatrix::zeros(x.rows(), x.cols()),
    };
    let mut u1 = DenseMatrix::zeros(x.rows(), x.cols());
    let mut u2 = vec![T::zero(); l];
    let mut u3 = DenseMatrix::zeros(x.rows(), x.cols());
    let mut rho = cfg.admm_rho;
    // Nonconvex runs can cycle at a fixed rho; they get an increasing penalty
    // instead, which never shrinks so the prox threshold cannot swallow the
    // iterate.
    let convex = p == T::one() && lq.is_none_or(|(q, _)| q == T::one());

    let mut trace = Vec::new();
    let mut rel = T::infinity();
    let mut stopped = false;
    let mut iterations = 0;
    let tiny = T::min_positive_value();
    while iterations < cfg.max_iterations {
        iterations += 1;
        // X-update.
        let mut rhs = &z - &u1;
        let tw: Vec<T> = bbar
            .iter()
            .zip(&w)
            .zip(&u2)
            .map(|((&bi, &wi), &ui)| bi - wi - ui)
            .collect();
        rhs = &rhs + &op.adjoint(&tw)?;
        if ds.is_some() {
            let inner = &(&atb - &y) - &u3;
            let a_inner = op.apply(&inner)?;
            rhs = &rhs + &op.adjoint(&a_inner)?;
        }
        x = op.solve(&rhs)?;
        let ax = op.apply(&x)?;
        let atax = if ds.is_some() {
            Some(op.adjoint(&ax)?)
        } else {
            None
        };

        // Z-, w- and Y-updates.
        let (z_next, spectrum) = spectral_map(&(&x + &u1), |v| prox_pow(v, T::one() / rho, p))?;
        let w_next = project_w(
            bbar.iter()
                .zip(&ax)
                .zip(&u2)
                .map(|((&bi, &a), &ui)| bi - a - ui)
                .collect(),
        );
        let y_next = match (ds, &atax) {
            (Some(radius), Some(atax)) => spectral_clip(&(&(&atb - atax) - &u3), radius)?,
            _ => y.clone(),
        };

        // Dual updates and residuals.
        let r1 = &x - &z_next;
        let r2: Vec<T> = ax
            .iter()
            .zip(&w_next)
            .zip(&bbar)
            .map(|((&a, &wi), &bi)| a + wi - bi)
            .collect();
        let mut primal = r1.frobenius_norm().powi(2) + sq(&r2);
        u1 = &u1 + &r1;
        add_assign(&mut u2, &r2);
        if let Some(atax) = &atax {
            let r3 = &(atax + &y_next) - &atb;
            primal = primal + r3.frobenius_norm().powi(2);
            u3 = &u3 + &r3;
        }
        let primal = primal.sqrt();
        let dz = (&z_next - &z).frobenius_norm();
        let dw = norm2(
            &w_next
                .iter()
                .zip(&w)
                .map(|(&a, &b)| a - b)
                .collect::<Vec<_>>(),
        );
        let dy = (&y_next - &y).frobenius_norm();
        let dual = rho * (dz * dz + dw * dw + dy * dy).sqrt();

        let znorm = z_next.frobenius_norm();
        rel = if znorm.max(z.frobenius_norm()) > tiny {
            dz / znorm.max(z.frobenius_norm())
        } else {
            T::zero()
        };
        z = z_next;
        w = w_next;
        y = y_next;
        trace.push(spectrum.iter().map(|&v| v.powf(p)).sum::<T>() * unit.powf(p));

        let base = x.frobenius_norm().max(bnorm).max(tiny);
        if rel <= cfg.tolerance && primal <= cfg.tolerance * base {
            let cand = if sparse_ball {
                op.zero_residual_where(&bbar, &w, &z)?
            } else {
                z.clone()
            };
            if meets_set(&cand)? {
                z = cand;
                stopped = true;
                break;
            }
        }
        if iterations % 10 == 0 {
            let grow = if convex {
                primal > T::lit(10.0) * dual
            } else {
                primal > cfg.tolerance * base
            };
            if grow {
                let f = if convex { T::lit(2.0) } else { T::lit(1.2) };
                rho = rho * f;
                u1 = u1.scale(T::one() / f);
                u2.iter_mut().for_each(|v| *v = *v / f);
                u3 = u3.scale(T::one() / f);
            } else if convex && dual > T::lit(10.0) * primal {
                rho = rho * T::lit(0.5);
                u1 = u1.scale(T::lit(2.0));
                u2.iter_mut().for_each(|v| *v = *v * T::lit(2.0));
                u3 = u3.scale(T::lit(2.0));
            }
        }
    }
    if !stopped && sparse_ball {
        let cand = op.zero_residual_where(&bbar, &w, &z)?;
        if meets_set(&cand)? {
            z = cand;
        }
    }
    let estimate = z.scale(unit);
    let objective = schatten_pow(&estimate, p)?;
    Ok(Run {
        x: estimate,
        objective,
        trace,
        iterations,
        rel_change: rel,
        stopped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_ball_projection() {
        let w = project_lq_ball(&[3.0f64, -1.0, 0.5], 1.0, 2.0);
        assert!((w[0] - 2.0).abs() < 1e-12 && w[1] == 0.0 && w[2] == 0.0);
        assert_eq!(project_lq_ball(&[0.1, -0.2], 1.0, 1.0), vec![0.1, -0.2]);
        assert_eq!(project_lq_ball(&[0.1, -0.2], 0.5, 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn lq_ball_projection_lands_inside() {
        let v = [2.0, -1.5, 0.3, 0.05];
        let w = project_lq_ball(&v, 0.5, 1.0);
        let qs: f64 = w.iter().map(|x: &f64| x.abs().sqrt()).sum();
        assert!(qs <= 1.0 + 1e-9);
        assert!(w
            .iter()
            .zip(&v)
            .all(|(a, b)| a.abs() <= b.abs() && a * b >= 0.0));
    }
}
