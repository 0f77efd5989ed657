//! Riemann theta functions, the Kummer map and secant planes to Kummer
//! varieties, with a formal hierarchy for degenerate secants and genus-2
//! Jacobian test geometry.
//!
//! The `parallel` feature (on by default) evaluates batches, sample sets and
//! half-period enumerations with rayon; without it the same code runs
//! sequentially. Results are identical either way.

// `!(x <= tol)` is deliberate: NaN must fail the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hierarchy;
pub mod kummer;
mod linalg;
mod par;
pub mod period;
pub mod point;
pub mod sampling;
pub mod scenarios;
pub mod secant;
pub mod series;
pub mod theta;

pub use error::{Error, Result};
pub use kummer::{projective_distance, ProjectivePoint, SecondOrderBasis};
pub use par::is_parallel;
pub use period::{Lift, PeriodMatrix};
pub use point::ComplexPoint;
pub use secant::SecantConfiguration;
pub use theta::{theta, DerivativeSpec, DEFAULT_EPS};
