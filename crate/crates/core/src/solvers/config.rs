use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RopError};
use crate::matrix_core::DenseMatrix;
use crate::measurement::NoiseSpec;
use crate::scalar::Scalar;

/// Feasible set enforced by a solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSpec<T> {
    /// `A(X) = b`.
    Equality,
    /// `||b - A(X)||_q / L <= eta1`.
    LqBall {
        q: T,
        eta1: T,
    },
    /// `||A*(b - A(X))||_{S_inf} <= eta2`.
    DantzigBall {
        eta2: T,
    },
    Intersection {
        q: T,
        eta1: T,
        eta2: T,
    },
    /// `||X||_{S_p} = 1`.
    SchattenSphere {
        p: T,
    },
    /// `X ⪰ 0, tr X = 1`.
    Spectahedron,
}

impl<T: Scalar> ConstraintSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConstraintSpec::SchattenSphere { p } if !(p > T::zero() && p <= T::one()) => Err(
                RopError::Argument(format!("sphere exponent must lie in (0, 1], got {p}")),
            ),
            ConstraintSpec::SchattenSphere { .. } | ConstraintSpec::Spectahedron => Ok(()),
            _ => self.residual_set().expect("residual constraint").validate(),
        }
    }

    /// The residual set `B` for constraints of the form `b - A(X) ∈ B`.
    pub fn residual_set(&self) -> Option<NoiseSpec<T>> {
        match *self {
            ConstraintSpec::Equality => Some(NoiseSpec::None),
            ConstraintSpec::LqBall { q, eta1 } => Some(NoiseSpec::LqBounded { q, eta1 }),
            ConstraintSpec::DantzigBall { eta2 } => Some(NoiseSpec::Dantzig { eta2 }),
            ConstraintSpec::Intersection { q, eta1, eta2 } => {
                Some(NoiseSpec::Intersection { q, eta1, eta2 })
            }
            ConstraintSpec::SchattenSphere { .. } | ConstraintSpec::Spectahedron => None,
        }
    }
}

/// Iteration controls shared by every solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    /// Schatten exponent of the objective or sphere, in `(0, 1]`.
    pub p: T,
    /// Residual exponent of least-q, in `(0, 1]`.
    pub q: T,
    pub max_iterations: usize,
    /// Relative Frobenius change of iterates that counts as converged.
    pub tolerance: T,
    /// Initial smoothing, relative to the problem scale.
    pub smoothing_epsilon_initial: T,
    pub smoothing_decay: T,
    pub smoothing_floor: T,
    pub admm_rho: T,
    pub restarts: usize,
    /// Seed for randomized restarts.
    pub seed: u64,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            p: T::one(),
            q: T::one(),
            max_iterations: 2000,
            tolerance: T::lit(1e-7),
            smoothing_epsilon_initial: T::lit(1e-1),
            smoothing_decay: T::lit(0.7),
            smoothing_floor: T::lit(1e-10),
            admm_rho: T::one(),
            restarts: 3,
            seed: 0,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn with_p(mut self, p: T) -> Self {
        self.p = p;
        self
    }

    pub fn with_q(mut self, q: T) -> Self {
        self.q = q;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: T| {
            if v > T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(RopError::Argument(format!(
                    "{name} must lie in (0, 1], got {v}"
                )))
            }
        };
        unit("p", self.p)?;
        unit("q", self.q)?;
        if self.max_iterations == 0 {
            return Err(RopError::Argument("max_iterations must be positive".into()));
        }
        let positive = [
            ("tolerance", self.tolerance),
            ("smoothing_epsilon_initial", self.smoothing_epsilon_initial),
            ("smoothing_floor", self.smoothing_floor),
            ("admm_rho", self.admm_rho),
        ];
        for (name, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(RopError::Argument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.smoothing_decay > T::zero() && self.smoothing_decay < T::one()) {
            return Err(RopError::Argument(format!(
                "smoothing_decay must lie in (0, 1), got {}",
                self.smoothing_decay
            )));
        }
        Ok(())
    }
}

/// Which program produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SchattenPIrls,
    SchattenPAdmm,
    NuclearAdmm,
    LeastQ,
    LeastSquaresSphere,
    PhaseLiftLad,
}

/// Solver output plus diagnostics.
#[derive(Clone, Debug)]
pub struct RecoveryReport<T> {
    pub estimate: DenseMatrix<T>,
    pub method: Method,
    /// Iterations of the winning run.
    pub iterations_used: usize,
    pub final_objective: T,
    /// Relative Frobenius change of the last iteration of the winning run.
    pub final_relative_change: T,
    /// Named slacks of the enforced constraints (nonnegative when met).
    pub constraint_slack: BTreeMap<String, T>,
    pub feasible: bool,
    /// Stopping rule met and the constraint satisfied.
    pub converged: bool,
    /// Only ever claimed for convex programs (`p = q = 1`) that converged.
    pub globally_optimal: bool,
    /// Objective trace of every restart, one value per outer iteration.
    pub restart_traces: Vec<Vec<T>>,
    pub best_restart: usize,
}
