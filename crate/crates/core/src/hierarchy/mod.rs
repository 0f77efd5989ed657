//! The formal secant hierarchy.
//!
//! A degenerate secant `(u, b_1, ..., b_m)` with tangent `W^(1)` is extended
//! order by order to a formal curve `C(eps)` and coefficient series
//! `alpha_x(eps)` making
//! `P(z, eps) = sum_x alpha_x(eps) theta(z + x + C/2) theta(z - x - C/2)`
//! vanish identically in `z`. At each order the unknowns enter `P_s`
//! affinely, so they are fitted by least squares over sample points and the
//! post-solve residual witnesses solvability.

mod assemble;
mod partitions;
mod premise;
mod restriction;
mod solve;
mod state;

pub use assemble::{
    apply_delta, assemble_p, assemble_q, design_row, factor_series, unknowns,
};
pub use partitions::{weighted_partitions, OperatorWord};
pub use premise::{fit_tangent_direction, premise_check, PremiseReport};
pub use restriction::{
    find_g_points, g_membership, restriction_identity_check, restriction_report,
    RestrictionReport, G_TOLERANCE,
};
pub use solve::{run_hierarchy, solve_order, OrderSolution, ABORT_RESIDUAL, SUCCESS_RESIDUAL};
pub use state::{HierarchySeed, HierarchyState};

use crate::error::Result;
use crate::point::ComplexPoint;

/// `R_s(z)`, the `eps^s` coefficient of `P(z + C/2, eps)`.
pub fn assemble_r(state: &HierarchyState, s: usize, z: &ComplexPoint, eps: f64) -> Result<num_complex::Complex64> {
    Ok(assemble::assemble_shifted(state, s, z, 1.0, eps)?.0)
}

/// `T_s(z)`, the `eps^s` coefficient of `P(z - C/2, eps)`.
pub fn assemble_t(state: &HierarchyState, s: usize, z: &ComplexPoint, eps: f64) -> Result<num_complex::Complex64> {
    Ok(assemble::assemble_shifted(state, s, z, -1.0, eps)?.0)
}
