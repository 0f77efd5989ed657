//! The identities for `R(z, eps) = P(z + C/2, eps)` and
//! `T(z, eps) = P(z - C/2, eps)` restricted to
//! `G = Theta_u . Theta_{-u} . Theta_{b_1} ... Theta_{b_{m-1}}`.
//!
//! On `G` every product except the `b_m` one (and, for `T`, the `b_j` ones)
//! vanishes, leaving
//!
//! `R_s = Delta_{s-1} theta_{-b_m} . theta_{b_m}`,
//! `T_s = Delta^-_{s-1} theta_{b_m} . theta_{-b_m}
//!        + sum_{j<m} sum_{l=1}^{s} alpha_{j+2,l} theta_{-b_j} . Delta^-_{s-l} theta_{b_j}`,
//!
//! with `Delta` built from the full directions `W^(j)` and `Delta^-` from
//! `-W^(j)`. The `T` sum is also reported with `Delta^-_{s-j}` in place of
//! `Delta^-_{s-l}`; the two readings coincide for `m = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::assemble::{apply_delta, assemble_shifted};
use super::state::HierarchyState;
use crate::error::{Error, Result};
use crate::linalg;
use crate::point::ComplexPoint;
use crate::sampling;
use crate::theta::{self, DerivativeSpec};

/// Membership tolerance for points of `G`.
pub const G_TOLERANCE: f64 = 1e-8;

/// The translations whose theta translates cut out `G`: `u, -u, b_1..b_{m-1}`.
fn defining_translations(state: &HierarchyState) -> Vec<ComplexPoint> {
    let mut v = vec![state.u.clone(), -&state.u];
    v.extend(state.b[..state.m - 1].iter().cloned());
    v
}

/// Largest `|theta(z - x)|` over the defining translations.
pub fn g_membership(state: &HierarchyState, z: &ComplexPoint, eps: f64) -> Result<f64> {
    let none = DerivativeSpec::none();
    let mut worst: f64 = 0.0;
    for x in defining_translations(state) {
        worst = worst.max(theta::theta(&state.pm, &(z - &x), &none, eps)?.norm());
    }
    Ok(worst)
}

/// Damped Newton (pseudo-inverse steps) for the simultaneous zeros of the
/// defining translates, from `starts` deterministic random starts; returns
/// the distinct lattice-reduced points found.
pub fn find_g_points(
    state: &HierarchyState,
    starts: usize,
    seed: u64,
    eps: f64,
) -> Result<Vec<ComplexPoint>> {
    let pm = &state.pm;
    let g = pm.g();
    let xs = defining_translations(state);
    if xs.len() > g {
        return Err(Error::InvalidArgument(format!(
            "G is cut out by {} equations in genus {g}; need m + 1 <= g",
            xs.len()
        )));
    }
    let eval = |z: &ComplexPoint| -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
        let mut f = Vec::with_capacity(xs.len());
        let mut jac = Vec::with_capacity(xs.len());
        for x in &xs {
            let (v, grad) = theta::theta_with_gradient(pm, &(z - x), eps)?;
            f.push(v);
            jac.push(grad);
        }
        Ok((f, jac))
    };
    let norm = |f: &[Complex64]| f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut rng = sampling::rng(seed);
    let mut found: Vec<ComplexPoint> = Vec::new();
    for _ in 0..starts {
        let mut z = sampling::reduced_point(pm, &mut rng);
        let (mut f, mut jac) = eval(&z)?;
        let mut r = norm(&f);
        for _ in 0..100 {
            if r <= 1e-14 {
                break;
            }
            let a = nalgebra::DMatrix::from_fn(xs.len(), g, |i, j| jac[i][j]);
            let rhs: Vec<Complex64> = f.iter().map(|c| -c).collect();
            let step = ComplexPoint::new(linalg::least_squares(&a, &rhs, 1e-12).solution)?;
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-4 {
                let cand = &z + &(&step * t);
                let (fc, jc) = eval(&cand)?;
                let rc = norm(&fc);
                if rc < r {
                    z = cand;
                    f = fc;
                    jac = jc;
                    r = rc;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if r > 1e-12 {
            continue;
        }
        let z = pm.reduce(&z).point;
        if g_membership(state, &z, eps)? > G_TOLERANCE {
            continue;
        }
        if found.iter().all(|p| pm.lattice_distance(p, &z) > 1e-6) {
            found.push(z);
        }
    }
    Ok(found)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub order: usize,
    pub points: usize,
    /// Max `|R_s - Delta_{s-1} theta_{-b_m} theta_{b_m}|`, relative to the
    /// typical term size of `R_s` away from `G` (on Jacobian data every
    /// term vanishes on `G`, so local scales are meaningless).
    pub r_discrepancy: f64,
    /// Max normalized `T_s` discrepancy, inner derivative order `s - l`.
    pub t_discrepancy: f64,
    /// The same with inner derivative order `s - j`.
    pub t_discrepancy_alt: f64,
    /// Max `|R_s|` on the points, same normalization.
    pub r_magnitude: f64,
    /// Max `|T_s|` on the points, same normalization.
    pub t_magnitude: f64,
}

fn validate_points(state: &HierarchyState, points: &[ComplexPoint], eps: f64) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points of G supplied".into()));
    }
    for (index, z) in points.iter().enumerate() {
        z.check_dim(state.g(), "G point")?;
        let value = g_membership(state, z, eps)?;
        if !(value <= G_TOLERANCE) {
            return Err(Error::NotOnIntersection { index, value });
        }
    }
    Ok(())
}

/// RMS over fixed reduced points of the largest term in `R_s` and `T_s`.
fn typical_scales(state: &HierarchyState, s: usize, eps: f64) -> Result<(f64, f64)> {
    const SAMPLES: usize = 8;
    let (mut r, mut t) = (0.0, 0.0);
    for z in sampling::reduced_points(&state.pm, SAMPLES, 0) {
        r += assemble_shifted(state, s, &z, 1.0, eps)?.1.powi(2);
        t += assemble_shifted(state, s, &z, -1.0, eps)?.1.powi(2);
    }
    Ok(((r / SAMPLES as f64).sqrt(), (t / SAMPLES as f64).sqrt()))
}

pub fn restriction_report(
    state: &HierarchyState,
    s: usize,
    points: &[ComplexPoint],
    eps: f64,
) -> Result<RestrictionReport> {
    state.validate()?;
    if s == 0 || s > state.order {
        return Err(Error::InvalidArgument(format!(
            "order {s} outside 1..={}",
            state.order
        )));
    }
    validate_points(state, points, eps)?;
    let pm = &state.pm;
    let none = DerivativeSpec::none();
    let bm = &state.b[state.m - 1];
    let (r_typical, t_typical) = typical_scales(state, s, eps)?;
    let (mut r_worst, mut t_worst, mut t_alt_worst) = (0.0f64, 0.0f64, 0.0f64);
    let (mut r_size, mut t_size) = (0.0f64, 0.0f64);
    for z in points {
        let th_plus = theta::theta(pm, &(z + bm), &none, eps)?;
        let th_minus = theta::theta(pm, &(z - bm), &none, eps)?;

        let (r, r_terms) = assemble_shifted(state, s, z, 1.0, eps)?;
        let r_expected = apply_delta(state, s - 1, 1.0, 1.0, &(-bm), z, eps)? * th_minus;
        let scale = r_typical.max(r_terms).max(r_expected.norm()).max(f64::MIN_POSITIVE);
        r_worst = r_worst.max((r - r_expected).norm() / scale);
        r_size = r_size.max(r.norm() / scale);

        let (t, t_terms) = assemble_shifted(state, s, z, -1.0, eps)?;
        let head = apply_delta(state, s - 1, -1.0, 1.0, bm, z, eps)? * th_plus;
        let (mut tail, mut tail_alt) = (head, head);
        for (j, bj) in state.b[..state.m - 1].iter().enumerate() {
            let th_bj = theta::theta(pm, &(z + bj), &none, eps)?;
            for l in 1..=s {
                let coeff = state.alphaj[j][l - 1] * th_bj;
                tail += coeff * apply_delta(state, s - l, -1.0, 1.0, bj, z, eps)?;
                // index j is 1-based in the alternative reading
                if let Some(k) = s.checked_sub(j + 1) {
                    tail_alt += coeff * apply_delta(state, k, -1.0, 1.0, bj, z, eps)?;
                }
            }
        }
        let t_scale = t_typical.max(t_terms).max(tail.norm()).max(f64::MIN_POSITIVE);
        t_worst = t_worst.max((t - tail).norm() / t_scale);
        t_alt_worst = t_alt_worst.max((t - tail_alt).norm() / t_scale.max(tail_alt.norm()));
        t_size = t_size.max(t.norm() / t_scale);
    }
    Ok(RestrictionReport {
        order: s,
        points: points.len(),
        r_discrepancy: r_worst,
        t_discrepancy: t_worst,
        t_discrepancy_alt: t_alt_worst,
        r_magnitude: r_size,
        t_magnitude: t_size,
    })
}

/// Max normalized `R_s` discrepancy over the supplied points of `G`.
pub fn restriction_identity_check(
    state: &HierarchyState,
    s: usize,
    points: &[ComplexPoint],
    eps: f64,
) -> Result<f64> {
    Ok(restriction_report(state, s, points, eps)?.r_discrepancy)
}
