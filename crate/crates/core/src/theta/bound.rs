//! Tail bound for truncated theta sums.
//!
//! Terms of the (possibly differentiated) theta series are bounded by
//! `(c0 + c1 r)^N exp(-pi r^2)` where `r = ||T(n + c)||`, `c0 = 1 + 2 pi ||s||`,
//! `c1 = 2 pi / sqrt(lambda_min)` and `s = Im(tau)^{-1} Im(z)`. Lattice points
//! `T(n + c)` are at least `rho = sqrt(lambda_min)` apart, so balls of radius
//! `rho/2` around them are disjoint; once the radial profile is decreasing the
//! sum over `r > R` is dominated by
//!
//! `g (2/rho)^g * int_{R - rho}^inf (c0 + c1 u)^N (u + rho/2)^{g-1} exp(-pi u^2) du`,
//!
//! which expands into upper incomplete gamma functions.

use std::collections::HashMap;

use once_cell::sync::Lazy;
use parking_lot::RwLock;
use statrs::function::gamma::{gamma, gamma_ur};

use super::lattice::RADIUS_GRID;

#[derive(Clone, Copy, Debug)]
pub(crate) struct TailParams {
    pub g: usize,
    pub rho: f64,
    pub c0: f64,
    pub c1: f64,
    pub order: usize,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `int_L^inf u^p exp(-pi u^2) du`.
fn gaussian_moment_tail(p: usize, lower: f64) -> f64 {
    let a = (p as f64 + 1.0) / 2.0;
    let x = std::f64::consts::PI * lower * lower;
    let upper = if x == 0.0 { 1.0 } else { gamma_ur(a, x) };
    0.5 * std::f64::consts::PI.powf(-a) * gamma(a) * upper
}

impl TailParams {
    /// Radius beyond which the radial profile is decreasing.
    fn monotone_radius(&self) -> f64 {
        if self.order == 0 {
            return 0.0;
        }
        let pi = std::f64::consts::PI;
        let (a, b, c) = (
            2.0 * pi * self.c1,
            2.0 * pi * self.c0,
            -(self.order as f64) * self.c1,
        );
        (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
    }

    pub fn bound(&self, radius: f64) -> f64 {
        let lower = radius - self.rho;
        if lower < 0.0 || lower < self.monotone_radius() {
            return f64::INFINITY;
        }
        let g = self.g;
        let n = self.order;
        let mut total = 0.0;
        for k in 0..=n {
            let poly = binomial(n, k) * self.c0.powi((n - k) as i32) * self.c1.powi(k as i32);
            for l in 0..g {
                let shift = binomial(g - 1, l) * (self.rho / 2.0).powi((g - 1 - l) as i32);
                total += poly * shift * gaussian_moment_tail(k + l, lower);
            }
        }
        g as f64 * (2.0 / self.rho).powi(g as i32) * total
    }

    /// Smallest grid radius whose bound is at most `eps`.
    pub fn radius(&self, eps: f64) -> f64 {
        let start = ((self.rho + self.monotone_radius()) / RADIUS_GRID).ceil() as u64;
        let mut hi = start.max(1);
        while self.bound(hi as f64 * RADIUS_GRID) > eps {
            hi *= 2;
        }
        let mut lo = start;
        if self.bound(lo as f64 * RADIUS_GRID) <= eps {
            return lo as f64 * RADIUS_GRID;
        }
        // invariant: bound(lo) > eps >= bound(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.bound(mid as f64 * RADIUS_GRID) <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi as f64 * RADIUS_GRID
    }
}

type MemoKey = (u64, usize, u64, u64);

static MEMO: Lazy<RwLock<HashMap<MemoKey, f64>>> = Lazy::new(Default::default);

/// Centre norms are rounded up to this grid so the memo stays small; the bound
/// is increasing in the centre norm, so rounding up is conservative.
const CENTER_GRID: f64 = 1.0 / 16.0;

pub(crate) fn memo_radius(
    digest: u64,
    g: usize,
    lambda_min: f64,
    center_norm: f64,
    order: usize,
    eps: f64,
) -> f64 {
    let snapped = (center_norm / CENTER_GRID).ceil() * CENTER_GRID;
    let key = (digest, order, eps.to_bits(), snapped.to_bits());
    if let Some(&r) = MEMO.read().get(&key) {
        return r;
    }
    let rho = lambda_min.sqrt();
    let params = TailParams {
        g,
        rho,
        c0: 1.0 + 2.0 * std::f64::consts::PI * snapped,
        c1: 2.0 * std::f64::consts::PI / rho,
        order,
    };
    let r = params.radius(eps);
    MEMO.write().insert(key, r);
    r
}
