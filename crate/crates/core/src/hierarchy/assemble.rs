//! Evaluation of the `eps`-coefficients `P_s`, `Q_s` and their shifted
//! relatives.
//!
//! Two routes compute the same expansions: [`apply_delta`] sums operator
//! words through mixed derivatives, [`factor_series`] expands each lattice
//! term of the theta series directly. Assembly uses the second; the first is
//! kept as the term-by-term definition and for the restriction identities.

use num_complex::Complex64;

use super::partitions::weighted_partitions;
use super::state::HierarchyState;
use crate::error::{Error, Result};
use crate::point::ComplexPoint;
use crate::theta::{self, DerivativeSpec};

fn check_order(state: &HierarchyState, s: usize) -> Result<()> {
    if s > state.order {
        return Err(Error::InvalidArgument(format!(
            "order {s} exceeds the state's truncation order {}",
            state.order
        )));
    }
    Ok(())
}

/// `Delta_s theta_x (z)` where `theta_x(z) = theta(z - x)` and every `D_j`
/// differentiates along `sign * scale * W^(j)`.
pub fn apply_delta(
    state: &HierarchyState,
    s: usize,
    sign: f64,
    scale: f64,
    x: &ComplexPoint,
    z: &ComplexPoint,
    eps: f64,
) -> Result<Complex64> {
    check_order(state, s)?;
    let arg = z - x;
    let dirs: Vec<ComplexPoint> = state.w.iter().map(|w| w * (sign * scale)).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for word in weighted_partitions(s)? {
        let ops = word.operator_indices();
        if ops.iter().any(|&k| dirs[k - 1].is_zero()) {
            continue;
        }
        let spec = DerivativeSpec::new(ops.iter().map(|&k| dirs[k - 1].clone()).collect())?;
        total += theta::theta(&state.pm, &arg, &spec, eps)? * word.weight();
    }
    Ok(total)
}

/// Coefficients `0..=upto` of `eps -> theta(z + sign (base + C(eps)/2))`.
pub fn factor_series(
    state: &HierarchyState,
    base: &ComplexPoint,
    sign: f64,
    z: &ComplexPoint,
    upto: usize,
    eps: f64,
) -> Result<Vec<Complex64>> {
    scaled_factor(state, &(z + &(base * sign)), 0.5 * sign, upto, eps)
}

/// Coefficients of `eps -> theta(y + c C(eps))`.
fn scaled_factor(
    state: &HierarchyState,
    y: &ComplexPoint,
    c: f64,
    upto: usize,
    eps: f64,
) -> Result<Vec<Complex64>> {
    check_order(state, upto)?;
    if c == 0.0 {
        let v = theta::theta(&state.pm, y, &DerivativeSpec::none(), eps)?;
        let mut out = vec![Complex64::new(0.0, 0.0); upto + 1];
        out[0] = v;
        return Ok(out);
    }
    let dirs: Vec<ComplexPoint> = state.directions(upto).iter().map(|w| w * c).collect();
    theta::theta_series(&state.pm, y, &dirs, upto, eps)
}

/// Coefficient of `eps^s` in
/// `sum_x alpha_x(eps) theta(z + x + a C(eps)) theta(z - x + b C(eps))`
/// with `a = (shift + 1)/2`, `b = (shift - 1)/2`.
///
/// `shift = 0` is `P(z)`, `shift = 1` is `P(z + C/2)` and `shift = -1` is
/// `P(z - C/2)`. Alongside the value, returns the largest modulus of any
/// single product contributing to it.
pub(crate) fn assemble_shifted(
    state: &HierarchyState,
    s: usize,
    z: &ComplexPoint,
    shift: f64,
    eps: f64,
) -> Result<(Complex64, f64)> {
    check_order(state, s)?;
    let (a, b) = ((shift + 1.0) / 2.0, (shift - 1.0) / 2.0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale: f64 = 0.0;
    for (x, alpha) in state.bases(s) {
        let plus = scaled_factor(state, &(z + &x), a, s, eps)?;
        let minus = scaled_factor(state, &(z - &x), b, s, eps)?;
        for (i, al) in alpha.iter().enumerate() {
            if *al == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..=s - i {
                let t = al * plus[k] * minus[s - i - k];
                total += t;
                scale = scale.max(t.norm());
            }
        }
    }
    Ok((total, scale))
}

/// `P_s(z)`.
pub fn assemble_p(state: &HierarchyState, s: usize, z: &ComplexPoint, eps: f64) -> Result<Complex64> {
    Ok(assemble_shifted(state, s, z, 0.0, eps)?.0)
}

/// `Q_s(z)`: `P_s` with the order-`s` unknowns set to zero.
pub fn assemble_q(state: &HierarchyState, s: usize, z: &ComplexPoint, eps: f64) -> Result<Complex64> {
    check_order(state, s)?;
    if s == 0 {
        return assemble_p(state, 0, z, eps);
    }
    assemble_p(&without_unknowns(state, s), s, z, eps)
}

pub(crate) fn without_unknowns(state: &HierarchyState, s: usize) -> HierarchyState {
    let mut st = state.clone();
    let zero = Complex64::new(0.0, 0.0);
    st.alpha1[s - 1] = zero;
    st.w[s - 1] = ComplexPoint::zeros(st.g());
    for a in &mut st.alphaj {
        a[s - 1] = zero;
    }
    st
}

/// Coefficients of the order-`s` unknowns in `P_s(z)`, ordered
/// `[alpha_{1,s}, W^(s)_1..W^(s)_g, alpha_{3,s}, ..., alpha_{m+1,s}]`.
/// They do not depend on `s`.
pub fn design_row(state: &HierarchyState, z: &ComplexPoint, eps: f64) -> Result<Vec<Complex64>> {
    let pm = &state.pm;
    let (tp, gp) = theta::theta_with_gradient(pm, &(z + &state.u), eps)?;
    let (tm, gm) = theta::theta_with_gradient(pm, &(z - &state.u), eps)?;
    let mut row = vec![tp * tm];
    for i in 0..state.g() {
        row.push(gp[i] * tm - tp * gm[i]);
    }
    let none = DerivativeSpec::none();
    for bj in &state.b[..state.m - 1] {
        row.push(theta::theta(pm, &(z + bj), &none, eps)? * theta::theta(pm, &(z - bj), &none, eps)?);
    }
    Ok(row)
}

/// The order-`s` unknowns of `state` in [`design_row`] order.
pub fn unknowns(state: &HierarchyState, s: usize) -> Vec<Complex64> {
    let mut v = vec![state.alpha1[s - 1]];
    v.extend_from_slice(state.w[s - 1].coords());
    v.extend(state.alphaj.iter().map(|a| a[s - 1]));
    v
}

pub(crate) fn set_unknowns(state: &mut HierarchyState, s: usize, x: &[Complex64]) -> Result<()> {
    let g = state.g();
    state.alpha1[s - 1] = x[0];
    state.w[s - 1] = ComplexPoint::new(x[1..=g].to_vec())?;
    for (j, a) in state.alphaj.iter_mut().enumerate() {
        a[s - 1] = x[g + 1 + j];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::period::PeriodMatrix;
    use crate::sampling;

    fn state(m: usize, order: usize) -> HierarchyState {
        let pm = PeriodMatrix::from_re_im(
            &[vec![0.15, -0.2], vec![-0.2, 0.3]],
            &[vec![1.05, 0.25], vec![0.25, 0.9]],
        )
        .unwrap();
        let mut rng = sampling::rng(11);
        let u = sampling::box_point(2, 0.3, &mut rng);
        let b = (0..m).map(|_| sampling::box_point(2, 0.3, &mut rng)).collect();
        let w1 = sampling::box_point(2, 0.5, &mut rng);
        let mut st = HierarchyState::new(pm, m, u, b, w1, order).unwrap();
        for s in 2..=order {
            st.w[s - 1] = sampling::box_point(2, 0.4, &mut rng);
        }
        for s in 1..=order {
            st.alpha1[s - 1] = sampling::box_point(1, 0.5, &mut rng)[0];
            for a in &mut st.alphaj {
                a[s - 1] = sampling::box_point(1, 0.5, &mut rng)[0];
            }
        }
        st
    }

    fn points(n: usize, seed: u64) -> Vec<ComplexPoint> {
        let st = state(1, 1);
        sampling::reduced_points(&st.pm, n, seed)
    }

    #[test]
    fn p0_vanishes() {
        for m in 1..=2 {
            let st = state(m, 3);
            for z in points(20, 1) {
                assert!(assemble_p(&st, 0, &z, 1e-12).unwrap().norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn p1_matches_direct_display() {
        let st = state(2, 2);
        let pm = &st.pm;
        let none = DerivativeSpec::none();
        let th = |p: &ComplexPoint| theta::theta(pm, p, &none, 1e-12).unwrap();
        let d1 = |p: &ComplexPoint| theta::theta(pm, p, &DerivativeSpec::single(st.w[0].clone()), 1e-12).unwrap();
        for z in points(10, 2) {
            let (zp, zm) = (&z + &st.u, &z - &st.u);
            let mut direct = st.alpha1[0] * th(&zp) * th(&zm) + d1(&zp) * th(&zm) - d1(&zm) * th(&zp);
            for j in 0..st.m {
                let a = if j + 1 < st.m { st.alphaj[j][0] } else { Complex64::new(1.0, 0.0) };
                direct += a * th(&(&z + &st.b[j])) * th(&(&z - &st.b[j]));
            }
            let got = assemble_p(&st, 1, &z, 1e-12).unwrap();
            assert!((got - direct).norm() <= 1e-10, "{got} vs {direct}");
        }
    }

    #[test]
    fn p2_bookkeeping_for_first_order_curve() {
        // only W^(1) nonzero and no free coefficients: the order-2 terms cancel
        // between the u and -u products, and alpha_{m+2} = eps enters at order 1 only
        let mut st = state(1, 2);
        st.alpha1 = vec![Complex64::new(0.0, 0.0); 2];
        st.w[1] = ComplexPoint::zeros(2);
        for z in points(10, 3) {
            let p2 = assemble_p(&st, 2, &z, 1e-12).unwrap();
            // direct: (1/8)(D^2 th(z+u) th(z-u) - 2 D th(z+u) D th(z-u) + th(z+u) D^2 th(z-u))
            //   - same with u -> -u, which is identical, so they cancel;
            // the b-term contributes (1/2)(D th(z+b) th(z-b) - th(z+b) D th(z-b))
            let pm = &st.pm;
            let d = |p: &ComplexPoint| {
                theta::theta(pm, p, &DerivativeSpec::single(st.w[0].clone()), 1e-12).unwrap()
            };
            let t = |p: &ComplexPoint| theta::theta(pm, p, &DerivativeSpec::none(), 1e-12).unwrap();
            let (bp, bm) = (&z + &st.b[0], &z - &st.b[0]);
            let expected = 0.5 * (d(&bp) * t(&bm) - t(&bp) * d(&bm));
            assert!((p2 - expected).norm() <= 1e-10);
        }
    }

    #[test]
    fn q_is_independent_of_unknowns() {
        let st = state(2, 3);
        let mut other = st.clone();
        other.alpha1[2] += Complex64::new(0.3, -0.1);
        other.w[2] = &other.w[2] + &ComplexPoint::real(&[0.2, -0.5]);
        other.alphaj[0][2] += Complex64::new(-0.4, 0.2);
        for z in points(5, 4) {
            let q1 = assemble_q(&st, 3, &z, 1e-12).unwrap();
            let q2 = assemble_q(&other, 3, &z, 1e-12).unwrap();
            assert!((q1 - q2).norm() <= 1e-12);
            assert!((assemble_p(&st, 3, &z, 1e-12).unwrap() - assemble_p(&other, 3, &z, 1e-12).unwrap()).norm() > 1e-6);
        }
    }

    #[test]
    fn p_is_q_plus_design_times_unknowns() {
        let st = state(2, 3);
        for s in 1..=3 {
            for z in points(5, 5) {
                let p = assemble_p(&st, s, &z, 1e-12).unwrap();
                let q = assemble_q(&st, s, &z, 1e-12).unwrap();
                let row = design_row(&st, &z, 1e-12).unwrap();
                let lin: Complex64 = row.iter().zip(unknowns(&st, s)).map(|(a, x)| a * x).sum();
                assert!((p - q - lin).norm() <= 1e-12 * (1.0 + p.norm()));
            }
        }
    }

    #[test]
    fn superposition_of_unknowns() {
        let st = state(2, 2);
        let z = &points(1, 6)[0];
        let mut rng = sampling::rng(9);
        let n = 1 + 2 + 1;
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| sampling::box_point(n, 1.0, rng).into_coords();
        let (x1, x2) = (draw(&mut rng), draw(&mut rng));
        let eval = |x: &[Complex64]| {
            let mut s2 = st.clone();
            set_unknowns(&mut s2, 2, x).unwrap();
            assemble_p(&s2, 2, z, 1e-12).unwrap()
        };
        let sum: Vec<Complex64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        let lhs = eval(&sum) + eval(&zero);
        let rhs = eval(&x1) + eval(&x2);
        assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn delta_routes_agree() {
        let st = state(2, 4);
        for z in points(4, 7) {
            for sign in [1.0, -1.0] {
                let series = factor_series(&st, &st.b[0], sign, &z, 4, 1e-12).unwrap();
                let x = -(&st.b[0] * sign);
                for s in 0..=4 {
                    let words = apply_delta(&st, s, sign, 0.5, &x, &z, 1e-12).unwrap();
                    assert!((series[s] - words).norm() <= 1e-10 * (1.0 + words.norm()), "s = {s}");
                }
            }
        }
    }

    #[test]
    fn delta_basics() {
        let st = state(1, 2);
        let z = &points(1, 8)[0];
        let x = &st.b[0];
        let d0 = apply_delta(&st, 0, 1.0, 1.0, x, z, 1e-12).unwrap();
        let t = theta::theta(&st.pm, &(z - x), &DerivativeSpec::none(), 1e-12).unwrap();
        assert_eq!(d0, t);
        let one = apply_delta(&st, 1, -1.0, 0.5, x, z, 1e-12).unwrap();
        let two = apply_delta(&st, 1, -1.0, 1.0, x, z, 1e-12).unwrap();
        assert!((two - one * 2.0).norm() <= 1e-14 * two.norm());
        // central difference of theta(z - x + h * sign * scale * W1)
        let h = 1e-5;
        let dir = &st.w[0] * (-0.5);
        let f = |t: f64| theta::theta(&st.pm, &(&(z - x) + &(&dir * t)), &DerivativeSpec::none(), 1e-12).unwrap();
        let fd = (f(h) - f(-h)) / (2.0 * h);
        assert!((fd - one).norm() <= 1e-7 * (1.0 + one.norm()));
    }

    #[test]
    fn series_is_stable_under_higher_truncation() {
        let st = state(1, 4);
        let z = &points(1, 10)[0];
        let low = factor_series(&st, &st.u, 1.0, z, 2, 1e-12).unwrap();
        let high = factor_series(&st, &st.u, 1.0, z, 4, 1e-12).unwrap();
        for s in 0..=2 {
            assert!((low[s] - high[s]).norm() <= 1e-12 * (1.0 + low[s].norm()));
        }
    }

    #[test]
    fn zero_curve_series_is_constant() {
        let mut st = state(1, 3);
        st.w = vec![ComplexPoint::zeros(2); 3];
        let z = &points(1, 12)[0];
        let s = factor_series(&st, &st.u, -1.0, z, 3, 1e-12).unwrap();
        let t = theta::theta(&st.pm, &(z - &st.u), &DerivativeSpec::none(), 1e-12).unwrap();
        assert!((s[0] - t).norm() <= 1e-14);
        assert!(s[1..].iter().all(|c| c.norm() == 0.0));
    }
}
