//! Secant planes to the Kummer variety.
//!
//! `m + 2` points `K(zeta + a_i)` lie on an `m`-plane exactly when the
//! `2^g x (m+2)` matrix of their coordinates has rank at most `m + 1`; the
//! residual used throughout is the singular-value ratio `sigma_{m+2} / sigma_1`,
//! taken after scaling each column so its largest entry is 1 (the Kummer
//! points are projective, and raw columns can differ in size by many orders
//! of magnitude away from the fundamental domain).

mod propagate;
mod search;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kummer::SecondOrderBasis;
use crate::linalg;
use crate::par::*;
use crate::point::ComplexPoint;
use crate::sampling;
use crate::theta::{self, DerivativeSpec};

pub use crate::period::Lift;
pub use propagate::{
    involution_identity, propagate, propagation_secant_check, PropagationCheck, PropagationResult,
};
pub use search::{nelder_mead, secant_search, SearchOptions, SimplexOutcome};

/// Default rank tolerance for calling a configuration a secant.
pub const DEFAULT_SECANT_TOLERANCE: f64 = 1e-8;

/// Candidate `(m+2)`-secant: points `a_1..a_{m+2}` translated by `zeta`.
///
/// The period matrix is not part of the value; operations take the
/// [`SecondOrderBasis`] alongside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecantConfiguration {
    pub m: usize,
    pub points: Vec<ComplexPoint>,
    pub zeta: ComplexPoint,
    pub residual: Option<f64>,
    pub alpha: Option<ComplexPoint>,
}

impl SecantConfiguration {
    pub fn new(m: usize, points: Vec<ComplexPoint>, zeta: ComplexPoint) -> Result<Self> {
        if points.len() != m + 2 {
            return Err(Error::DimensionMismatch {
                what: "secant points",
                expected: m + 2,
                got: points.len(),
            });
        }
        for p in &points {
            p.check_dim(zeta.dim(), "secant point")?;
        }
        Ok(SecantConfiguration {
            m,
            points,
            zeta,
            residual: None,
            alpha: None,
        })
    }

    /// Checks shapes against the basis: `m + 2 <= 2^g` and matching dimensions.
    pub fn validate(&self, basis: &SecondOrderBasis) -> Result<()> {
        let g = basis.g();
        if self.points.len() != self.m + 2 {
            return Err(Error::DimensionMismatch {
                what: "secant points",
                expected: self.m + 2,
                got: self.points.len(),
            });
        }
        if self.m + 2 > basis.len() {
            return Err(Error::InvalidArgument(format!(
                "an {}-plane through {} points needs 2^g > m + 1 (g = {g})",
                self.m,
                self.m + 2
            )));
        }
        self.zeta.check_dim(g, "zeta")?;
        for p in &self.points {
            p.check_dim(g, "secant point")?;
        }
        Ok(())
    }

    /// The translated points `zeta + a_i`.
    pub fn arguments(&self) -> Vec<ComplexPoint> {
        self.points.iter().map(|a| &self.zeta + a).collect()
    }
}

/// Column `i` holds `(theta_j(zeta + a_i))_j`, unnormalized.
pub fn secant_matrix(
    basis: &SecondOrderBasis,
    cfg: &SecantConfiguration,
    eps: f64,
) -> Result<DMatrix<Complex64>> {
    cfg.validate(basis)?;
    kummer_matrix(basis, &cfg.arguments(), eps)
}

pub(crate) fn kummer_matrix(
    basis: &SecondOrderBasis,
    args: &[ComplexPoint],
    eps: f64,
) -> Result<DMatrix<Complex64>> {
    let cols = args
        .iter()
        .map(|z| basis.second_order_values(z, eps))
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(basis.len(), args.len(), |j, i| cols[i][j]))
}

/// Columns rescaled to largest-modulus entry 1, with the divisors used.
pub(crate) fn projective_columns(m: &DMatrix<Complex64>, eps: f64) -> Result<(DMatrix<Complex64>, Vec<Complex64>)> {
    let mut pivots = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let pivot = *m
            .column(j)
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("non-empty");
        if pivot.norm() < 1e3 * eps {
            return Err(Error::IllPosedComparison {
                sigma_max: pivot.norm(),
            });
        }
        pivots.push(pivot);
    }
    let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / pivots[j]);
    Ok((scaled, pivots))
}

/// `sigma_last / sigma_1` of the projectively normalized matrix.
pub(crate) fn rank_residual(m: &DMatrix<Complex64>, eps: f64) -> Result<(f64, Vec<f64>)> {
    let (scaled, _) = projective_columns(m, eps)?;
    let dec = linalg::svd(&scaled);
    let last = *dec.values.last().expect("non-empty");
    Ok((last / dec.values[0], dec.values))
}

/// `sigma_{m+2} / sigma_1` of the normalized secant matrix; stored into
/// `cfg.residual`.
pub fn secant_residual(
    basis: &SecondOrderBasis,
    cfg: &mut SecantConfiguration,
    eps: f64,
) -> Result<f64> {
    let m = secant_matrix(basis, cfg, eps)?;
    let (r, _) = rank_residual(&m, eps)?;
    cfg.residual = Some(r);
    Ok(r)
}

/// The null vector `alpha` with `sum_i alpha_i theta_j(zeta + a_i) = 0`,
/// scaled so its largest-modulus entry is 1. Stored into `cfg.alpha`.
pub fn secant_coefficients(
    basis: &SecondOrderBasis,
    cfg: &mut SecantConfiguration,
    tolerance: f64,
    eps: f64,
) -> Result<ComplexPoint> {
    let raw = secant_matrix(basis, cfg, eps)?;
    let (m, pivots) = projective_columns(&raw, eps)?;
    let dec = linalg::svd(&m);
    let k = dec.values.len() - 1;
    let s1 = dec.values[0];
    let residual = dec.values[k] / s1;
    cfg.residual = Some(residual);
    if residual > tolerance {
        return Err(Error::NotASecant {
            residual,
            tolerance,
        });
    }
    if k >= 1 && dec.values[k - 1] <= 10.0 * dec.values[k] {
        return Err(Error::DegenerateSecant {
            smallest: dec.values[k],
            next: dec.values[k - 1],
        });
    }
    let v = &dec.right[k];
    let m_v = &m * nalgebra::DVector::from_column_slice(v);
    if m_v.norm() / s1 > 10.0 * tolerance {
        return Err(Error::NotASecant {
            residual: m_v.norm() / s1,
            tolerance: 10.0 * tolerance,
        });
    }
    // back to the scale of the raw theta values
    let raw_v: Vec<Complex64> = v.iter().zip(&pivots).map(|(c, p)| c / p).collect();
    let pivot = *raw_v
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("non-empty");
    let alpha: Vec<Complex64> = raw_v.iter().map(|c| c / pivot).collect();
    let alpha = ComplexPoint::new(alpha)?;
    cfg.alpha = Some(alpha.clone());
    Ok(alpha)
}

/// Max over sampled `z` of
/// `|sum_i alpha_i theta(z + 2 zeta + a_i) theta(z - a_i)| / max_i |alpha_i theta(..) theta(..)|`.
///
/// Samples are reduced points drawn from `seed`; the maximum is taken in
/// sample order.
pub fn bilinear_residual(
    basis: &SecondOrderBasis,
    cfg: &SecantConfiguration,
    alpha: &ComplexPoint,
    sample_count: usize,
    seed: u64,
    eps: f64,
) -> Result<f64> {
    cfg.validate(basis)?;
    if alpha.dim() != cfg.points.len() {
        return Err(Error::DimensionMismatch {
            what: "secant coefficients",
            expected: cfg.points.len(),
            got: alpha.dim(),
        });
    }
    if alpha.is_zero() {
        return Err(Error::InvalidArgument(
            "secant coefficients must not all vanish".into(),
        ));
    }
    let pm = basis.period_matrix();
    let samples = sampling::reduced_points(pm, sample_count, seed);
    let two_zeta = &cfg.zeta * 2.0;
    let none = DerivativeSpec::none();
    let per_sample: Vec<Result<f64>> = samples
        .par_iter()
        .map(|z| {
            let shifted = z + &two_zeta;
            let mut total = Complex64::new(0.0, 0.0);
            let mut scale: f64 = 0.0;
            for (a, &c) in cfg.points.iter().zip(alpha.coords()) {
                let t = c
                    * theta::theta(pm, &(&shifted + a), &none, eps)?
                    * theta::theta(pm, &(z - a), &none, eps)?;
                total += t;
                scale = scale.max(t.norm());
            }
            Ok(if scale > 0.0 { total.norm() / scale } else { 0.0 })
        })
        .collect();
    let mut worst: f64 = 0.0;
    for r in per_sample {
        worst = worst.max(r?);
    }
    Ok(worst)
}
