//! Independent oracles shared by the integration tests. Nothing here calls
//! the lattice enumeration, truncation bound or argument reduction of the
//! library: sums run over plain integer boxes.

#![allow(dead_code)]

use std::f64::consts::PI;

use kummer_secant::{ComplexPoint, PeriodMatrix};
use num_complex::Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

fn quad(pm: &PeriodMatrix, v: &[f64]) -> Complex64 {
    let g = pm.g();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..g {
        for j in 0..g {
            s += pm.tau(i, j) * v[i] * v[j];
        }
    }
    s
}

fn pair(v: &[f64], z: &ComplexPoint) -> Complex64 {
    v.iter().zip(z.coords()).map(|(a, b)| b * *a).sum()
}

/// Integer points of the box `|n_i - centre_i| <= half_width`.
pub fn box_points(centre: &[i64], half_width: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &c in centre {
        out = out
            .into_iter()
            .flat_map(|v| {
                (c - half_width..=c + half_width).map(move |n| {
                    let mut w = v.clone();
                    w.push(n);
                    w
                })
            })
            .collect();
    }
    out
}

/// Integer vector nearest the Gaussian centre `-Im(tau)^{-1} Im(z)`.
pub fn gaussian_centre(pm: &PeriodMatrix, z: &ComplexPoint) -> Vec<i64> {
    let y = pm.im_matrix();
    let iz = z.im();
    // solve by Gaussian elimination to stay independent of the cached inverse
    let g = pm.g();
    let mut a: Vec<Vec<f64>> = (0..g)
        .map(|i| {
            let mut row: Vec<f64> = (0..g).map(|j| y[(i, j)]).collect();
            row.push(iz[i]);
            row
        })
        .collect();
    for k in 0..g {
        let p = (k..g).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        for i in 0..g {
            if i != k {
                let f = a[i][k] / a[k][k];
                for j in k..=g {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
    }
    (0..g).map(|i| (-a[i][g] / a[i][i]).round() as i64).collect()
}

/// `sum_{n in box} prod_k (2 pi i n^T W_k) exp(i pi (n+a)^T tau (n+a) + 2 pi i (n+a)^T (z+b))`.
pub fn brute_theta_char(
    pm: &PeriodMatrix,
    a: &[f64],
    b: &[f64],
    z: &ComplexPoint,
    directions: &[ComplexPoint],
    half_width: i64,
) -> Complex64 {
    let zb = z + &ComplexPoint::real(b);
    let centre = gaussian_centre(pm, z);
    box_points(&centre, half_width)
        .into_iter()
        .map(|n| {
            let v: Vec<f64> = n.iter().zip(a).map(|(&k, &s)| k as f64 + s).collect();
            let mut t = (I * PI * quad(pm, &v) + 2.0 * PI * I * pair(&v, &zb)).exp();
            for w in directions {
                t *= 2.0 * PI * I * pair(&v, w);
            }
            t
        })
        .sum()
}

pub fn brute_theta(pm: &PeriodMatrix, z: &ComplexPoint, directions: &[ComplexPoint], half_width: i64) -> Complex64 {
    let zero = vec![0.0; pm.g()];
    brute_theta_char(pm, &zero, &zero, z, directions, half_width)
}

/// `theta[sigma, 0](2z | 2 tau)` for every `sigma in {0, 1/2}^g`, lexicographic.
pub fn brute_second_order(pm: &PeriodMatrix, z: &ComplexPoint, half_width: i64) -> Vec<Complex64> {
    let g = pm.g();
    let doubled = pm.doubled();
    let z2 = z * 2.0;
    (0..1usize << g)
        .map(|code| {
            let sigma: Vec<f64> = (0..g)
                .map(|i| if code >> (g - 1 - i) & 1 == 1 { 0.5 } else { 0.0 })
                .collect();
            brute_theta_char(&doubled, &sigma, &vec![0.0; g], &z2, &[], half_width)
        })
        .collect()
}

/// `exp(pi Im(z)^T Im(tau)^{-1} Im(z))`, the natural size of `|theta(z)|`.
pub fn gaussian_scale(pm: &PeriodMatrix, z: &ComplexPoint) -> f64 {
    let yi = pm.im_inverse();
    let y = z.im();
    let g = pm.g();
    let mut q = 0.0;
    for i in 0..g {
        for j in 0..g {
            q += y[i] * yi[(i, j)] * y[j];
        }
    }
    (PI * q).exp()
}

/// Central difference of `f` along `w` at `z`.
pub fn central_difference<F>(f: F, z: &ComplexPoint, w: &ComplexPoint, h: f64) -> Complex64
where
    F: Fn(&ComplexPoint) -> Complex64,
{
    (f(&(z + &(w * h))) - f(&(z - &(w * h)))) / (2.0 * h)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
