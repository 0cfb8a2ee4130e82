//! Rank-one projection measurement operators, their adjoints, the symmetric
//! debiasing transform, and bounded noise models.

mod ensemble;
mod map;
mod noise;
pub mod rng;

pub use ensemble::{MeasurementVector, RopEnsemble};
pub(crate) use map::check_measurements;
pub use map::{ExplicitMap, LinearMap, DEFAULT_EXPLICIT_CAP};
pub use noise::{
    check_feasible, check_feasible_with_tol, dantzig_level, generate_noise, gross_corruption,
    lq_level, Feasibility, NoiseSpec, DEFAULT_FEASIBILITY_TOL,
};
