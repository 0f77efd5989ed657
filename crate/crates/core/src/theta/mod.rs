//! Riemann theta function with zero characteristic,
//!
//! `theta(z) = sum_{n in Z^g} exp(i pi n^T tau n + 2 pi i n^T z)`,
//!
//! its half-integer characteristic variants, directional derivatives and
//! truncated Taylor series along a formal curve.
//!
//! The lattice sum is centred at `-s` with `s = Im(tau)^{-1} Im(z)`: shifting
//! the summation index by the integer part of `s` is the quasi-periodicity
//! relation, and the real factor `exp(pi Im(z)^T s)` is pulled out so every
//! summed term has modulus at most one. The truncation error of the summed
//! part is at most `eps`; the returned value therefore carries absolute error
//! at most `eps * exp(pi Im(z)^T Im(tau)^{-1} Im(z))`, which is `eps` up to a
//! modest factor for reduced arguments.

mod bound;
pub mod lattice;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::*;
use crate::period::PeriodMatrix;
use crate::point::ComplexPoint;

pub use lattice::LatticeCache;

pub const MAX_DERIVATIVE_ORDER: usize = 12;
pub const DEFAULT_EPS: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Ordered list of derivative directions; empty means plain evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DerivativeSpec {
    directions: Vec<ComplexPoint>,
}

impl DerivativeSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(directions: Vec<ComplexPoint>) -> Result<Self> {
        if directions.len() > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderTooHigh {
                order: directions.len(),
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        Ok(DerivativeSpec { directions })
    }

    pub fn single(direction: ComplexPoint) -> Self {
        DerivativeSpec {
            directions: vec![direction],
        }
    }

    pub fn directions(&self) -> &[ComplexPoint] {
        &self.directions
    }

    pub fn order(&self) -> usize {
        self.directions.len()
    }

    fn check(&self, g: usize) -> Result<()> {
        for d in &self.directions {
            d.check_dim(g, "derivative direction")?;
        }
        Ok(())
    }

    fn norm_product(&self) -> f64 {
        self.directions.iter().map(ComplexPoint::norm).product()
    }
}

/// Where the lattice sum is centred for one argument.
struct Frame {
    /// integer part of the centre, subtracted from the cached points
    k: Vec<i64>,
    /// fractional part of the centre, in `[-1/2, 1/2]^g`
    frac: Vec<f64>,
    log_scale: f64,
    radius: f64,
    points: Arc<Vec<Vec<i64>>>,
}

fn centre(pm: &PeriodMatrix, z: &ComplexPoint) -> (Vec<f64>, f64) {
    let g = pm.g();
    let y = z.im();
    let inv = pm.im_inverse();
    let s: Vec<f64> = (0..g)
        .map(|i| (0..g).map(|j| inv[(i, j)] * y[j]).sum())
        .collect();
    let log_scale = PI * y.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>();
    (s, log_scale)
}

fn frame(pm: &PeriodMatrix, z: &ComplexPoint, shift: &[f64], order: usize, eps: f64) -> Frame {
    let (s, log_scale) = centre(pm, z);
    let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let radius = bound::memo_radius(pm.digest(), pm.g(), pm.lambda_min(), s_norm, order, eps);
    let c: Vec<f64> = s.iter().zip(shift).map(|(a, b)| a + b).collect();
    let k: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
    let frac: Vec<f64> = c.iter().zip(&k).map(|(a, &b)| a - b as f64).collect();
    // every centre in the unit cube lies within this distance of the origin
    let im = pm.im_matrix();
    let slack = 0.5 * (0..pm.g()).map(|i| im[(i, i)].sqrt()).sum::<f64>();
    let points = LatticeCache::global().points(pm, radius + slack);
    Frame {
        k,
        frac,
        log_scale,
        radius,
        points,
    }
}

/// Calls `visit(v, term)` for each retained `v in Z^g + shift`, with
/// `term = exp(i pi v^T tau v + 2 pi i v^T z) / exp(log_scale)`; returns
/// `exp(log_scale)`.
fn for_each_term<F: FnMut(&[f64], Complex64)>(
    pm: &PeriodMatrix,
    z: &ComplexPoint,
    shift: &[f64],
    order: usize,
    eps: f64,
    mut visit: F,
) -> f64 {
    let g = pm.g();
    let fr = frame(pm, z, shift, order, eps);
    let chol = pm.cholesky_upper();
    let re = pm.re_matrix();
    let x = z.re();
    let r2 = fr.radius * fr.radius;
    let mut v = vec![0.0; g];
    for p in fr.points.iter() {
        let q = lattice::ellipsoid_norm_sqr(chol, p, &fr.frac);
        if q > r2 {
            continue;
        }
        for i in 0..g {
            v[i] = (p[i] - fr.k[i]) as f64 + shift[i];
        }
        let mut quad = 0.0;
        for i in 0..g {
            let mut row = 0.0;
            for j in 0..g {
                row += re[(i, j)] * v[j];
            }
            quad += v[i] * row;
        }
        let lin: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
        let phase = PI * quad + 2.0 * PI * lin;
        let term = Complex64::from_polar((-PI * q).exp(), phase);
        visit(&v, term);
    }
    fr.log_scale.exp()
}

fn pair(v: &[f64], w: &ComplexPoint) -> Complex64 {
    w.pair_real(v)
}

/// Characteristic theta sum over `v in Z^g + a` at argument `z` (the `b`
/// characteristic is folded into `z` by the caller).
pub(crate) fn char_sum(
    pm: &PeriodMatrix,
    a: &[f64],
    z: &ComplexPoint,
    deriv: &DerivativeSpec,
    eps: f64,
) -> Complex64 {
    let eps_eff = eps / deriv.norm_product().max(1.0);
    let dirs = deriv.directions();
    let mut acc = Complex64::new(0.0, 0.0);
    let scale = for_each_term(pm, z, a, deriv.order(), eps_eff, |v, term| {
        let mut factor = Complex64::new(1.0, 0.0);
        for w in dirs {
            factor *= 2.0 * PI * I * pair(v, w);
        }
        acc += factor * term;
    });
    acc * scale
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// `theta(z)` or a mixed directional derivative of it, one factor
/// `2 pi i n^T W` per direction `W`.
pub fn theta(
    pm: &PeriodMatrix,
    z: &ComplexPoint,
    deriv: &DerivativeSpec,
    eps: f64,
) -> Result<Complex64> {
    check_eps(eps)?;
    z.check_dim(pm.g(), "theta argument")?;
    deriv.check(pm.g())?;
    Ok(char_sum(pm, &vec![0.0; pm.g()], z, deriv, eps))
}

/// The translated section `theta_x(z) = theta(z - x)`.
pub fn theta_translate(
    pm: &PeriodMatrix,
    z: &ComplexPoint,
    x: &ComplexPoint,
    deriv: &DerivativeSpec,
    eps: f64,
) -> Result<Complex64> {
    x.check_dim(pm.g(), "translation")?;
    z.check_dim(pm.g(), "theta argument")?;
    theta(pm, &(z - x), deriv, eps)
}

/// Theta with characteristic `[a, b]`:
/// `sum_n exp(i pi (n+a)^T tau (n+a) + 2 pi i (n+a)^T (z+b))`.
pub fn theta_char(
    pm: &PeriodMatrix,
    a: &[f64],
    b: &[f64],
    z: &ComplexPoint,
    deriv: &DerivativeSpec,
    eps: f64,
) -> Result<Complex64> {
    check_eps(eps)?;
    let g = pm.g();
    z.check_dim(g, "theta argument")?;
    deriv.check(g)?;
    if a.len() != g || b.len() != g {
        return Err(Error::DimensionMismatch {
            what: "characteristic",
            expected: g,
            got: a.len().min(b.len()),
        });
    }
    Ok(char_sum(pm, a, &(z + &ComplexPoint::real(b)), deriv, eps))
}

/// Value and gradient of `theta` at `z` in one lattice pass.
pub fn theta_with_gradient(
    pm: &PeriodMatrix,
    z: &ComplexPoint,
    eps: f64,
) -> Result<(Complex64, Vec<Complex64>)> {
    check_eps(eps)?;
    let g = pm.g();
    z.check_dim(g, "theta argument")?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut grad = vec![Complex64::new(0.0, 0.0); g];
    let scale = for_each_term(pm, z, &vec![0.0; g], 1, eps, |v, term| {
        value += term;
        for i in 0..g {
            grad[i] += 2.0 * PI * I * v[i] * term;
        }
    });
    Ok((value * scale, grad.into_iter().map(|d| d * scale).collect()))
}

/// Taylor coefficients `c_0..=c_order` of `eps -> theta(z + sum_j eps^j W_j)`,
/// where `directions[j-1] = W_j`.
///
/// Each lattice term contributes `exp(sum_j t_j eps^j)` with
/// `t_j = 2 pi i n^T W_j`, expanded by the usual exponential recurrence.
pub fn theta_series(
    pm: &PeriodMatrix,
    z: &ComplexPoint,
    directions: &[ComplexPoint],
    order: usize,
    eps: f64,
) -> Result<Vec<Complex64>> {
    check_eps(eps)?;
    let g = pm.g();
    z.check_dim(g, "theta argument")?;
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::OrderTooHigh {
            order,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    for d in directions {
        d.check_dim(g, "series direction")?;
    }
    let used = &directions[..directions.len().min(order)];
    // |coefficient_s| <= (2w)^s (1 + 2 pi |n|)^s per term, w = max(1, |W_j|)
    let w = used.iter().map(ComplexPoint::norm).fold(1.0, f64::max);
    let eps_eff = eps / (2.0 * w).powi(order as i32);
    let mut acc = vec![Complex64::new(0.0, 0.0); order + 1];
    let mut t = vec![Complex64::new(0.0, 0.0); order + 1];
    let mut e = vec![Complex64::new(0.0, 0.0); order + 1];
    let scale = for_each_term(pm, z, &vec![0.0; g], order, eps_eff, |v, term| {
        for (j, wj) in used.iter().enumerate() {
            t[j + 1] = 2.0 * PI * I * pair(v, wj);
        }
        e[0] = Complex64::new(1.0, 0.0);
        for n in 1..=order {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 1..=n.min(used.len()) {
                s += t[j] * e[n - j] * j as f64;
            }
            e[n] = s / n as f64;
        }
        for n in 0..=order {
            acc[n] += e[n] * term;
        }
    });
    Ok(acc.into_iter().map(|c| c * scale).collect())
}

/// Evaluates `theta` at many arguments; rayon-backed with the `parallel`
/// feature, sequential otherwise. Output order matches input order.
pub fn theta_batch(
    pm: &PeriodMatrix,
    zs: &[ComplexPoint],
    deriv: &DerivativeSpec,
    eps: f64,
) -> Result<Vec<Complex64>> {
    zs.par_iter().map(|z| theta(pm, z, deriv, eps)).collect()
}

/// Radius of the ellipsoid `||T(n + c)|| <= R` outside of which the
/// `order`-times differentiated series (unit directions) sums to at most `eps`.
/// Nondecreasing in `order` and in `1/eps`.
pub fn truncation_radius(pm: &PeriodMatrix, z: &ComplexPoint, order: usize, eps: f64) -> f64 {
    let (s, _) = centre(pm, z);
    let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    bound::memo_radius(pm.digest(), pm.g(), pm.lambda_min(), s_norm, order, eps)
}
