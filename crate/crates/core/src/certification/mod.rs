//! Empirical `l_q`-RUB constants, the recovery conditions they feed, and the
//! resulting error bounds.
//!
//! The RUB of order `r` asks for `C1 ||X||_F^q <= ||A(X)||_q^q / L <= C2 ||X||_F^q`
//! over all rank-`r` matrices. Sampled constants are inner estimates, so every
//! condition evaluated from them is optimistic.

mod bounds;
mod conditions;
mod rub;

pub use bounds::{
    nsp_error_bound, nsp_from_rub, nsp_residual_norm, stability_bound_least_q,
    stability_bound_schatten, BoundNoise, NspConstants, NspKind,
};
pub use conditions::{
    check_exact_condition, check_general_condition, check_rip_corollary, rip_corollary_s,
    rip_from_rub, rub_exponent, rub_from_rip, rub_order, GeneralCondition, RipConstants,
};
pub use rub::{estimate_rub, rub_ratio, sample_rank_r, RubEstimate};
