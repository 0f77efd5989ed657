//! Verified genus-2 Jacobian geometry.
//!
//! Every indecomposable principally polarized abelian surface is the Jacobian
//! of a genus-2 curve, and its theta divisor is a translate of the
//! Abel–Jacobi curve. Points of `Theta` therefore stand in for points of the
//! curve, and the Fay trisecant built from four of them needs no period
//! integrals: each Kummer argument is half of a combination with two plus and
//! two minus signs, so the Riemann constant cancels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{premise_check, HierarchySeed, PremiseReport};
use crate::kummer::SecondOrderBasis;
use crate::par::*;
use crate::period::{Lift, PeriodMatrix};
use crate::point::ComplexPoint;
use crate::sampling;
use crate::secant::{secant_coefficients, secant_residual, SecantConfiguration};
use crate::theta::{self, DerivativeSpec};

/// Required modulus of every even theta constant.
pub const THETA_CONSTANT_FLOOR: f64 = 1e-6;
/// Required `|theta(z)|` at an accepted divisor point.
pub const DIVISOR_TOLERANCE: f64 = 1e-10;
/// Acceptance threshold for emitted Fay configurations.
pub const FAY_TOLERANCE: f64 = 1e-7;
/// Acceptance threshold for the tangency of degenerate configurations.
pub const TANGENCY_TOLERANCE: f64 = 1e-6;
/// Minimal pairwise lattice distance between Fay input points.
pub const SEPARATION: f64 = 1e-3;

const NEWTON_ITERATIONS: usize = 100;
const RESTARTS: usize = 20;

fn require_genus_two(pm: &PeriodMatrix) -> Result<()> {
    if pm.g() != 2 {
        return Err(Error::InvalidArgument(format!(
            "scenarios are implemented for genus 2, got {}",
            pm.g()
        )));
    }
    Ok(())
}

/// The ten even characteristics `[a, b]`, `a, b in {0, 1/2}^2`, `4 a.b` even.
pub fn even_characteristics() -> Vec<([f64; 2], [f64; 2])> {
    let halves: [[f64; 2]; 4] = [[0.0, 0.0], [0.0, 0.5], [0.5, 0.0], [0.5, 0.5]];
    let mut out = Vec::new();
    for a in halves {
        for b in halves {
            let parity = (4.0 * (a[0] * b[0] + a[1] * b[1])).round() as i64;
            if parity % 2 == 0 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Smallest modulus among the even theta constants.
pub fn min_even_theta_constant(pm: &PeriodMatrix, eps: f64) -> Result<f64> {
    require_genus_two(pm)?;
    let zero = ComplexPoint::zeros(2);
    let mut least = f64::INFINITY;
    for (a, b) in even_characteristics() {
        let v = theta::theta_char(pm, &a, &b, &zero, &DerivativeSpec::none(), eps)?;
        least = least.min(v.norm());
    }
    Ok(least)
}

/// A random genus-2 period matrix whose even theta constants all exceed
/// [`THETA_CONSTANT_FLOOR`] in modulus.
pub fn random_period_matrix_genus2(seed: u64, eps: f64) -> Result<PeriodMatrix> {
    let mut rng = sampling::rng(seed);
    let mut least = 0.0;
    for _ in 0..100 {
        let pm = sampling::period_matrix(2, 0.6, &mut rng);
        least = min_even_theta_constant(&pm, eps)?;
        if least > THETA_CONSTANT_FLOOR {
            return Ok(pm);
        }
    }
    Err(Error::Decomposable { modulus: least })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaDivisorPoint {
    pub z: ComplexPoint,
    pub residual: f64,
}

/// Newton on `w -> theta(z_1, w)` with `z_1` pinned; holomorphic in `w`, so
/// the complex step is the real 2x2 Newton step on `(Re theta, Im theta)`.
fn slice_newton(
    pm: &PeriodMatrix,
    z1: Complex64,
    mut w: Complex64,
    eps: f64,
    trace: &mut Vec<f64>,
) -> Result<(ComplexPoint, f64)> {
    let point = |w: Complex64| ComplexPoint::new(vec![z1, w]);
    let mut z = point(w)?;
    let (mut f, mut grad) = theta::theta_with_gradient(pm, &z, eps)?;
    let mut r = f.norm();
    for _ in 0..NEWTON_ITERATIONS {
        if r <= 1e-14 {
            break;
        }
        if grad[1].norm() == 0.0 {
            break;
        }
        let step = -f / grad[1];
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-6 {
            let cand = point(w + step * t)?;
            let (fc, gc) = theta::theta_with_gradient(pm, &cand, eps)?;
            if fc.norm() < r {
                w += step * t;
                z = cand;
                f = fc;
                grad = gc;
                r = f.norm();
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        trace.push(r);
        if !accepted {
            break;
        }
    }
    Ok((z, r))
}

/// Polishes a point of `Theta` after lattice reduction, where the
/// quasi-periodicity factor has changed the scale of `theta`.
fn reduce_on_divisor(pm: &PeriodMatrix, z: &ComplexPoint, eps: f64) -> Result<(ComplexPoint, f64)> {
    let reduced = pm.reduce(z).point;
    let mut trace = Vec::new();
    slice_newton(pm, reduced[0], reduced[1], eps, &mut trace)
}

/// A point of `Theta`: `z_1` is pinned from the seed and `z_2` found by
/// damped Newton, with up to [`RESTARTS`] fresh starts.
pub fn find_theta_divisor_point(pm: &PeriodMatrix, seed: u64, eps: f64) -> Result<ThetaDivisorPoint> {
    require_genus_two(pm)?;
    let mut rng = sampling::rng(seed);
    let mut trace = Vec::new();
    let mut best = f64::INFINITY;
    for _ in 0..=RESTARTS {
        let start = sampling::reduced_point(pm, &mut rng);
        let (z, r) = slice_newton(pm, start[0], start[1], eps, &mut trace)?;
        best = best.min(r);
        if r > 1e-12 {
            continue;
        }
        let (z, r) = reduce_on_divisor(pm, &z, eps)?;
        if r <= DIVISOR_TOLERANCE {
            return Ok(ThetaDivisorPoint { z, residual: r });
        }
    }
    Err(Error::RootFindingFailed {
        restarts: RESTARTS,
        best,
        trace,
    })
}

/// Divisor points from consecutive seeds, skipping any closer than
/// [`SEPARATION`] to earlier ones (in either sign, since `Theta` is symmetric).
pub fn separated_divisor_points(
    pm: &PeriodMatrix,
    count: usize,
    seed: u64,
    eps: f64,
) -> Result<Vec<ThetaDivisorPoint>> {
    let mut out: Vec<ThetaDivisorPoint> = Vec::with_capacity(count);
    let mut k = 0u64;
    while out.len() < count {
        if k > 50 * count as u64 + 50 {
            return Err(Error::InvalidArgument(
                "could not find enough separated divisor points".into(),
            ));
        }
        let p = find_theta_divisor_point(pm, seed.wrapping_mul(1_000_003).wrapping_add(k), eps)?;
        k += 1;
        let far = out.iter().all(|q| {
            pm.lattice_distance(&q.z, &p.z) >= SEPARATION
                && pm.lattice_distance(&q.z, &(-&p.z)) >= SEPARATION
        });
        if far {
            out.push(p);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FayConfiguration {
    pub config: SecantConfiguration,
    pub lift: Lift,
    /// `(lift, residual)` for every lift, in lift index order.
    pub table: Vec<(Lift, f64)>,
}

fn fay_parts(points: &[ComplexPoint; 4]) -> (Vec<ComplexPoint>, ComplexPoint) {
    let [za, zb, zc, zd] = points;
    let a1 = &(&(za + zb) - zc) * 0.5;
    let a2 = &(&(zb + zc) - za) * 0.5;
    let a3 = &(&(za + zc) - zb) * 0.5;
    (vec![a1, a2, a3], zd * -0.5)
}

/// The trisecant through `K((z_a + z_b - z_c - z_d)/2)`,
/// `K((z_b + z_c - z_a - z_d)/2)`, `K((z_a + z_c - z_b - z_d)/2)`, written as
/// `a_1 = (z_a + z_b - z_c)/2`, ..., `zeta = -z_d/2 + h(lift)`, minimised over
/// all half-period lifts.
pub fn fay_configuration(
    pm: &PeriodMatrix,
    points: &[ThetaDivisorPoint; 4],
    eps: f64,
) -> Result<FayConfiguration> {
    require_genus_two(pm)?;
    for i in 0..4 {
        for j in i + 1..4 {
            let d = pm.lattice_distance(&points[i].z, &points[j].z);
            if d < SEPARATION {
                return Err(Error::InvalidArgument(format!(
                    "divisor points {i} and {j} are only {d:e} apart"
                )));
            }
        }
    }
    let zs = [
        points[0].z.clone(),
        points[1].z.clone(),
        points[2].z.clone(),
        points[3].z.clone(),
    ];
    let (a, zeta0) = fay_parts(&zs);
    let basis = SecondOrderBasis::new(pm.clone());
    let rows: Vec<Result<(Lift, f64)>> = Lift::all(2)
        .into_par_iter()
        .map(|lift| {
            let zeta = &zeta0 + &pm.half_period(&lift)?;
            let mut cfg = SecantConfiguration::new(1, a.clone(), zeta)?;
            Ok((lift, secant_residual(&basis, &mut cfg, eps)?))
        })
        .collect();
    let table = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let (lift, best) = table
        .iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .cloned()
        .expect("sixteen lifts");
    if best > FAY_TOLERANCE {
        return Err(Error::NoSecantLift { best, table });
    }
    let zeta = &zeta0 + &pm.half_period(&lift)?;
    let mut config = SecantConfiguration::new(1, a, zeta)?;
    secant_coefficients(&basis, &mut config, FAY_TOLERANCE, eps)?;
    Ok(FayConfiguration {
        config,
        lift,
        table,
    })
}

/// `(d_2 theta, -d_1 theta)(z)`: tangent to `Theta` at `z`.
pub fn divisor_tangent(pm: &PeriodMatrix, z: &ComplexPoint, eps: f64) -> Result<ComplexPoint> {
    require_genus_two(pm)?;
    let (_, grad) = theta::theta_with_gradient(pm, z, eps)?;
    if grad.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::InvalidArgument("theta divisor is singular here".into()));
    }
    ComplexPoint::new(vec![grad[1], -grad[0]])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateConfiguration {
    pub seed: HierarchySeed,
    pub lift: Lift,
    pub premise: PremiseReport,
    /// Lattice distance between the two Fay arguments that collide, one of
    /// them negated (the Kummer map is even).
    pub collision_gap: f64,
    pub table: Vec<(Lift, f64)>,
}

/// Confluent limit `z_d -> z_b` of the Fay configuration on `(z_a, z_b, z_c, z_d)`:
/// `u = (z_a - z_c)/2`, `b_1 = (z_a + z_c)/2 - z_b`, both shifted by the
/// chosen half-period, and `W^(1)` the tangent to `Theta` at `z_b`.
pub fn degenerate_fay_configuration(
    pm: &PeriodMatrix,
    points: &[ThetaDivisorPoint; 3],
    eps: f64,
) -> Result<DegenerateConfiguration> {
    require_genus_two(pm)?;
    let [za, zb, zc] = [&points[0].z, &points[1].z, &points[2].z];
    let u0 = &(za - zc) * 0.5;
    let b0 = &(&(za + zc) * 0.5) - zb;
    let w1 = divisor_tangent(pm, zb, eps)?;
    // Fay arguments at z_d = z_b
    let zeta = zb * -0.5;
    let first = &zeta + &(&(&(za + zb) - zc) * 0.5);
    let second = &zeta + &(&(&(zb + zc) - za) * 0.5);
    let collision_gap = pm.lattice_distance(&first, &(-&second));

    let rows: Vec<Result<(Lift, f64)>> = Lift::all(2)
        .into_par_iter()
        .map(|lift| {
            let h = pm.half_period(&lift)?;
            let rep = premise_check(pm, 1, &(&u0 + &h), &[&b0 + &h], Some(&w1), eps)?;
            Ok((lift, rep.tangency))
        })
        .collect();
    let table = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let (lift, best) = table
        .iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .cloned()
        .expect("sixteen lifts");
    if best > TANGENCY_TOLERANCE {
        return Err(Error::NoSecantLift { best, table });
    }
    let h = pm.half_period(&lift)?;
    let u = &u0 + &h;
    let b = vec![&b0 + &h];
    let premise = premise_check(pm, 1, &u, &b, Some(&w1), eps)?;
    Ok(DegenerateConfiguration {
        seed: HierarchySeed { m: 1, u, b, w1 },
        lift,
        premise,
        collision_gap,
        table,
    })
}

/// Point of `Theta` with first coordinate `z_1 + h`, continued from `z`.
fn divisor_neighbour(pm: &PeriodMatrix, z: &ComplexPoint, h: f64, eps: f64) -> Result<ComplexPoint> {
    let (_, grad) = theta::theta_with_gradient(pm, z, eps)?;
    // first-order prediction along the tangent, then Newton in z_2
    let w0 = z[1] - grad[0] / grad[1] * h;
    let mut trace = Vec::new();
    let (p, r) = slice_newton(pm, z[0] + h, w0, eps, &mut trace)?;
    if r > 1e-12 {
        return Err(Error::RootFindingFailed {
            restarts: 0,
            best: r,
            trace,
        });
    }
    Ok(p)
}

/// Tangent direction at `z` estimated from a nearby divisor point
/// `z + h (1, v_2) + O(h^2)`, Richardson-extrapolated from steps `h` and
/// `h/2`; scaled so the first coordinate is 1.
pub fn finite_difference_tangent(pm: &PeriodMatrix, z: &ComplexPoint, h: f64, eps: f64) -> Result<ComplexPoint> {
    require_genus_two(pm)?;
    let chord = |step: f64| -> Result<Complex64> {
        let p = divisor_neighbour(pm, z, step, eps)?;
        Ok((p[1] - z[1]) / step)
    };
    let slope = chord(h / 2.0)? * 2.0 - chord(h)?;
    ComplexPoint::new(vec![Complex64::new(1.0, 0.0), slope])
}

/// Everything needed to exercise the secant checks on one Jacobian.
#[derive(Clone, Debug)]
pub struct FayScenario {
    pub pm: PeriodMatrix,
    pub points: Vec<ThetaDivisorPoint>,
    pub fay: FayConfiguration,
}

/// A screened period matrix and a Fay configuration from four separated
/// divisor points, all determined by `seed`.
pub fn fay_scenario(seed: u64, eps: f64) -> Result<FayScenario> {
    let pm = random_period_matrix_genus2(seed, eps)?;
    let points = separated_divisor_points(&pm, 4, seed, eps)?;
    let four = [
        points[0].clone(),
        points[1].clone(),
        points[2].clone(),
        points[3].clone(),
    ];
    let fay = fay_configuration(&pm, &four, eps)?;
    Ok(FayScenario { pm, points, fay })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_even_characteristics() {
        assert_eq!(even_characteristics().len(), 10);
    }

    #[test]
    fn diagonal_matrix_is_decomposable() {
        // diagonal tau splits into two elliptic curves: theta[1/2 1/2; 1/2 1/2](0) = 0
        let pm = PeriodMatrix::from_re_im(
            &[vec![0.1, 0.0], vec![0.0, 0.2]],
            &[vec![1.0, 0.0], vec![0.0, 1.1]],
        )
        .unwrap();
        assert!(min_even_theta_constant(&pm, 1e-12).unwrap() < 1e-10);
    }

    #[test]
    fn divisor_point_and_its_negative() {
        let pm = random_period_matrix_genus2(1, 1e-12).unwrap();
        let p = find_theta_divisor_point(&pm, 3, 1e-12).unwrap();
        assert!(p.residual <= DIVISOR_TOLERANCE);
        let t = |z: &ComplexPoint| theta::theta(&pm, z, &DerivativeSpec::none(), 1e-12).unwrap();
        assert!(t(&p.z).norm() <= 1e-10);
        assert!(t(&(-&p.z)).norm() <= 1e-10);
    }

    #[test]
    fn deterministic() {
        let a = fay_scenario(5, 1e-12).unwrap();
        let b = fay_scenario(5, 1e-12).unwrap();
        assert_eq!(a.fay, b.fay);
        assert_eq!(a.pm, b.pm);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let pm = random_period_matrix_genus2(2, 1e-12).unwrap();
        let pts = separated_divisor_points(&pm, 3, 2, 1e-12).unwrap();
        let four = [pts[0].clone(), pts[1].clone(), pts[2].clone(), pts[2].clone()];
        assert!(matches!(
            fay_configuration(&pm, &four, 1e-12),
            Err(Error::InvalidArgument(_))
        ));
    }
}
