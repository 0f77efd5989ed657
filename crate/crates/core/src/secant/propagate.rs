//! New secants from old: the `b`-point construction and the quadrisecant
//! involution.

use serde::{Deserialize, Serialize};

use super::{secant_residual, SecantConfiguration};
use crate::error::{Error, Result};
use crate::kummer::SecondOrderBasis;
use crate::par::*;
use crate::period::{Lift, PeriodMatrix};
use crate::point::ComplexPoint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub zeta_prime: ComplexPoint,
    pub b_points: Vec<ComplexPoint>,
    pub lift: Lift,
}

/// `b_1 = zeta' + a_3 + (a_1 + a_2)/2 + h(lift)`,
/// `b_j = b_1 - a_3 + a_{j+2}` for `2 <= j <= m`,
/// `b_{m+1} = a_2 + a_3 - b_1`, `b_{m+2} = a_1 + a_3 - b_1`.
pub fn propagate(
    pm: &PeriodMatrix,
    cfg: &SecantConfiguration,
    zeta_prime: &ComplexPoint,
    lift: &Lift,
) -> Result<PropagationResult> {
    let m = cfg.m;
    if m < 1 {
        return Err(Error::InvalidArgument(
            "propagation needs m >= 1 (at least three points)".into(),
        ));
    }
    if cfg.points.len() != m + 2 {
        return Err(Error::DimensionMismatch {
            what: "secant points",
            expected: m + 2,
            got: cfg.points.len(),
        });
    }
    let g = pm.g();
    zeta_prime.check_dim(g, "zeta'")?;
    for p in &cfg.points {
        p.check_dim(g, "secant point")?;
    }
    let a = &cfg.points;
    let half = pm.half_period(lift)?;
    let b1 = &(&(zeta_prime + &a[2]) + &(&(&a[0] + &a[1]) * 0.5)) + &half;
    let mut b = Vec::with_capacity(m + 2);
    b.push(b1.clone());
    for j in 2..=m {
        b.push(&(&b1 - &a[2]) + &a[j + 1]);
    }
    b.push(&(&a[1] + &a[2]) - &b1);
    b.push(&(&a[0] + &a[2]) - &b1);
    Ok(PropagationResult {
        zeta_prime: zeta_prime.clone(),
        b_points: b,
        lift: lift.clone(),
    })
}

/// Outcome of checking every lift of a propagated configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationCheck {
    pub best_lift: Lift,
    pub best_residual: f64,
    /// `(lift, residual)` in lift index order.
    pub table: Vec<(Lift, f64)>,
}

/// Tries all `2^(2g)` lifts of `b_1`, measuring whether
/// `K(zeta + b_1), ..., K(zeta + b_{m+2})` lie on an `m`-plane.
///
/// Fails with [`Error::NoSecantLift`] (carrying the full table) when no lift
/// reaches `tolerance`.
pub fn propagation_secant_check(
    basis: &SecondOrderBasis,
    cfg: &SecantConfiguration,
    zeta_prime: &ComplexPoint,
    tolerance: f64,
    eps: f64,
) -> Result<PropagationCheck> {
    cfg.validate(basis)?;
    let pm = basis.period_matrix();
    let lifts = Lift::all(pm.g());
    let rows: Vec<Result<(Lift, f64)>> = lifts
        .into_par_iter()
        .map(|lift| {
            let prop = propagate(pm, cfg, zeta_prime, &lift)?;
            let mut next = SecantConfiguration::new(cfg.m, prop.b_points, cfg.zeta.clone())?;
            let r = secant_residual(basis, &mut next, eps)?;
            Ok((lift, r))
        })
        .collect();
    let table = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let (best_lift, best_residual) = table
        .iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .cloned()
        .expect("at least one lift");
    if best_residual > tolerance {
        return Err(Error::NoSecantLift {
            best: best_residual,
            table,
        });
    }
    Ok(PropagationCheck {
        best_lift,
        best_residual,
        table,
    })
}

/// Lattice distance between `-b_1 - b_2` and `-2 zeta' - (a_1 + a_2 + a_3 + a_4)`
/// for the quadrisecant (`m = 2`) propagation.
pub fn involution_identity(
    pm: &PeriodMatrix,
    a: &[ComplexPoint],
    zeta_prime: &ComplexPoint,
    lift: &Lift,
) -> Result<f64> {
    if a.len() != 4 {
        return Err(Error::DimensionMismatch {
            what: "quadrisecant points",
            expected: 4,
            got: a.len(),
        });
    }
    let cfg = SecantConfiguration::new(2, a.to_vec(), ComplexPoint::zeros(pm.g()))?;
    let prop = propagate(pm, &cfg, zeta_prime, lift)?;
    let lhs = -(&prop.b_points[0] + &prop.b_points[1]);
    let s = a.iter().fold(ComplexPoint::zeros(pm.g()), |acc, p| &acc + p);
    let rhs = -(&(zeta_prime * 2.0) + &s);
    Ok(pm.lattice_distance(&lhs, &rhs))
}
