//! Enumeration of integer points inside lattice ellipsoids, and a shared cache
//! of those point sets keyed by period matrix and radius.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use once_cell::sync::Lazy;
use parking_lot::RwLock;

use crate::period::PeriodMatrix;

/// Radii are rounded up to this grid before caching.
pub const RADIUS_GRID: f64 = 1.0 / 64.0;

/// `||T (n + c)||^2` for upper triangular `T`.
pub fn ellipsoid_norm_sqr(chol: &DMatrix<f64>, n: &[i64], center: &[f64]) -> f64 {
    let g = n.len();
    let mut q = 0.0;
    for i in 0..g {
        let mut row = 0.0;
        for j in i..g {
            row += chol[(i, j)] * (n[j] as f64 + center[j]);
        }
        q += row * row;
    }
    q
}

/// All `n` in `Z^g` with `||T (n + c)|| <= radius`, by the usual
/// back-substitution recursion on the triangular factor.
pub fn enumerate_ellipsoid(chol: &DMatrix<f64>, center: &[f64], radius: f64) -> Vec<Vec<i64>> {
    let g = center.len();
    let mut out = Vec::new();
    let mut n = vec![0i64; g];
    let r2 = radius * radius;
    recurse(chol, center, r2, g, &mut n, r2, &mut out);
    out
}

fn recurse(
    chol: &DMatrix<f64>,
    center: &[f64],
    r2: f64,
    level: usize,
    n: &mut Vec<i64>,
    remaining: f64,
    out: &mut Vec<Vec<i64>>,
) {
    if level == 0 {
        if ellipsoid_norm_sqr(chol, n, center) <= r2 {
            out.push(n.clone());
        }
        return;
    }
    let g = center.len();
    let i = level - 1;
    let mut partial = 0.0;
    for j in level..g {
        partial += chol[(i, j)] * (n[j] as f64 + center[j]);
    }
    let tii = chol[(i, i)];
    let half_width = remaining.max(0.0).sqrt() / tii + 1e-9;
    let mid = -partial / tii - center[i];
    let lo = (mid - half_width).ceil() as i64;
    let hi = (mid + half_width).floor() as i64;
    for k in lo..=hi {
        n[i] = k;
        let row = tii * (k as f64 + center[i]) + partial;
        let rest = remaining - row * row;
        if rest < -1e-9 * r2.max(1.0) {
            continue;
        }
        recurse(chol, center, r2, level - 1, n, rest, out);
    }
    n[i] = 0;
}

type Key = (u64, u64);

/// Read-mostly store of centred lattice point sets.
///
/// Entries are immutable once inserted; concurrent inserts of the same key
/// compute identical sets, so the race is benign.
#[derive(Default)]
pub struct LatticeCache {
    map: RwLock<HashMap<Key, Arc<Vec<Vec<i64>>>>>,
}

static GLOBAL: Lazy<LatticeCache> = Lazy::new(LatticeCache::default);

impl LatticeCache {
    pub fn global() -> &'static LatticeCache {
        &GLOBAL
    }

    /// Points `n` with `||T n|| <= radius`, radius rounded up to [`RADIUS_GRID`].
    pub fn points(&self, pm: &PeriodMatrix, radius: f64) -> Arc<Vec<Vec<i64>>> {
        let snapped = snap_radius(radius);
        let key = (pm.digest(), snapped.to_bits());
        if let Some(hit) = self.map.read().get(&key) {
            return Arc::clone(hit);
        }
        let points = Arc::new(enumerate_ellipsoid(
            pm.cholesky_upper(),
            &vec![0.0; pm.g()],
            snapped,
        ));
        let mut guard = self.map.write();
        Arc::clone(guard.entry(key).or_insert(points))
    }

    pub fn len(&self) -> usize {
        self.map.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.map.write().clear();
    }
}

pub(crate) fn snap_radius(radius: f64) -> f64 {
    (radius / RADIUS_GRID).ceil() * RADIUS_GRID
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn box_scan(chol: &DMatrix<f64>, center: &[f64], radius: f64, half: i64) -> Vec<Vec<i64>> {
        let g = center.len();
        let side = (2 * half + 1) as usize;
        let mut out = Vec::new();
        for code in 0..side.pow(g as u32) {
            let mut c = code;
            let mut n = vec![0i64; g];
            for slot in n.iter_mut() {
                *slot = (c % side) as i64 - half;
                c /= side;
            }
            if ellipsoid_norm_sqr(chol, &n, center) <= radius * radius {
                out.push(n);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn enumeration_matches_box_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let g = 1 + trial % 3;
            let a = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
            let y = &a * a.transpose() + DMatrix::identity(g, g) * rng.random_range(0.3..1.5);
            let chol = nalgebra::Cholesky::new(y.clone()).unwrap().l().transpose();
            let center: Vec<f64> = (0..g).map(|_| rng.random_range(-0.5..0.5)).collect();
            let radius = rng.random_range(0.5..6.0);
            let lambda_min = nalgebra::SymmetricEigen::new(y)
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            let half = (radius / lambda_min.sqrt()).ceil() as i64 + 2;
            let mut got = enumerate_ellipsoid(&chol, &center, radius);
            got.sort();
            assert_eq!(got, box_scan(&chol, &center, radius, half), "trial {trial}");
        }
    }

    #[test]
    fn cache_reuses_entries() {
        let cache = LatticeCache::default();
        let pm = PeriodMatrix::from_re_im(&[vec![0.0]], &[vec![1.0]]).unwrap();
        let a = cache.points(&pm, 3.0);
        let b = cache.points(&pm, 3.0 - 1e-6);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
        assert_eq!(a.len(), 7);
    }
}
