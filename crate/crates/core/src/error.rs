use thiserror::Error;

use crate::hierarchy::HierarchyState;
use crate::period::Lift;
use crate::secant::SecantConfiguration;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("period matrix is not symmetric: max |tau[i,j] - tau[j,i]| = {asymmetry:e}")]
    NotSymmetric { asymmetry: f64 },
    #[error("imaginary part of the period matrix is not positive definite: smallest eigenvalue {lambda_min:e}")]
    NotPositiveDefinite { lambda_min: f64 },
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate Kummer point: largest second-order theta value {max_modulus:e} is below the accuracy floor")]
    DegenerateKummerPoint { max_modulus: f64 },
    #[error("ill-posed secant comparison: largest singular value {sigma_max:e} is below the accuracy floor")]
    IllPosedComparison { sigma_max: f64 },
    #[error("configuration is not a secant: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotASecant { residual: f64, tolerance: f64 },
    #[error("secant coefficients are not unique: smallest singular value {smallest:e}, next {next:e}")]
    DegenerateSecant { smallest: f64, next: f64 },
    #[error("secant search did not converge after {iterations} iterations (best residual {:e})", best.residual.unwrap_or(f64::NAN))]
    SearchNotConverged {
        best: Box<SecantConfiguration>,
        iterations: usize,
        trace: Vec<f64>,
    },
    #[error("no half-period lift yields a secant (best residual {best:e})")]
    NoSecantLift { best: f64, table: Vec<(Lift, f64)> },
    #[error("least-squares system at order {order} is rank deficient (rank {rank} of {unknowns})")]
    RankDeficient {
        order: usize,
        rank: usize,
        unknowns: usize,
    },
    #[error("hierarchy aborted at order {order}: post-solve residual {residual:e}")]
    HierarchyAborted {
        order: usize,
        residual: f64,
        state: Box<HierarchyState>,
    },
    #[error("point {index} is not on the intersection G: |theta| = {value:e}")]
    NotOnIntersection { index: usize, value: f64 },
    #[error("root finding failed after {restarts} restarts (best |theta| = {best:e})")]
    RootFindingFailed {
        restarts: usize,
        best: f64,
        trace: Vec<f64>,
    },
    #[error("period matrix looks decomposable: even theta constant of modulus {modulus:e}")]
    Decomposable { modulus: f64 },
}

impl Error {
    /// Numerical-tolerance failures as opposed to malformed input.
    pub fn is_tolerance_failure(&self) -> bool {
        matches!(
            self,
            Error::NotASecant { .. }
                | Error::DegenerateSecant { .. }
                | Error::SearchNotConverged { .. }
                | Error::NoSecantLift { .. }
                | Error::RankDeficient { .. }
                | Error::HierarchyAborted { .. }
                | Error::RootFindingFailed { .. }
                | Error::IllPosedComparison { .. }
                | Error::DegenerateKummerPoint { .. }
                | Error::Decomposable { .. }
        )
    }
}
