//! Deterministic pseudo-random inputs. All randomness flows from ChaCha8
//! streams seeded explicitly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::period::PeriodMatrix;
use crate::point::ComplexPoint;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A point `p + tau q` with `p` uniform in `[0, 1)^g` and `q` in `[-1/2, 1/2)^g`.
pub fn reduced_point<R: Rng>(pm: &PeriodMatrix, rng: &mut R) -> ComplexPoint {
    let g = pm.g();
    let p: Vec<f64> = (0..g).map(|_| rng.random_range(0.0..1.0)).collect();
    let q: Vec<f64> = (0..g).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut z = pm.tau_times(&q);
    z += &ComplexPoint::real(&p);
    z
}

pub fn reduced_points(pm: &PeriodMatrix, count: usize, seed: u64) -> Vec<ComplexPoint> {
    let mut r = rng(seed);
    (0..count).map(|_| reduced_point(pm, &mut r)).collect()
}

/// A point with coordinates uniform in the box `|Re|, |Im| <= half_width`.
pub fn box_point<R: Rng>(g: usize, half_width: f64, rng: &mut R) -> ComplexPoint {
    let coords = (0..g)
        .map(|_| {
            Complex64::new(
                rng.random_range(-half_width..half_width),
                rng.random_range(-half_width..half_width),
            )
        })
        .collect();
    ComplexPoint::new(coords).expect("finite")
}

/// A period matrix with `Re(tau)` entries in `[-1/2, 1/2]` and
/// `Im(tau) = A A^T + lambda I`, so the smallest eigenvalue is at least
/// `lambda_floor`.
pub fn period_matrix<R: Rng>(g: usize, lambda_floor: f64, rng: &mut R) -> PeriodMatrix {
    let a: Vec<Vec<f64>> = (0..g)
        .map(|_| (0..g).map(|_| rng.random_range(-0.4..0.4)).collect())
        .collect();
    let shift = lambda_floor + rng.random_range(0.0..0.6);
    let mut re = vec![vec![0.0; g]; g];
    let mut im = vec![vec![0.0; g]; g];
    for i in 0..g {
        for j in i..g {
            let x = rng.random_range(-0.5..0.5);
            re[i][j] = x;
            re[j][i] = x;
            let mut y: f64 = (0..g).map(|k| a[i][k] * a[j][k]).sum();
            if i == j {
                y += shift;
            }
            im[i][j] = y;
            im[j][i] = y;
        }
    }
    PeriodMatrix::from_re_im(&re, &im).expect("positive definite by construction")
}
