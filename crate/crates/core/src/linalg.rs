//! Thin wrappers over nalgebra's complex SVD with descending singular values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub(crate) struct SortedSvd {
    /// descending
    pub values: Vec<f64>,
    /// right singular vectors, `right[k]` paired with `values[k]`
    pub right: Vec<Vec<Complex64>>,
    pub left: Vec<Vec<Complex64>>,
}

pub(crate) fn svd(m: &DMatrix<Complex64>) -> SortedSvd {
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("requested U");
    let v_t = dec.v_t.expect("requested V^H");
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    SortedSvd {
        values: order.iter().map(|&k| dec.singular_values[k]).collect(),
        right: order
            .iter()
            .map(|&k| (0..v_t.ncols()).map(|i| v_t[(k, i)].conj()).collect())
            .collect(),
        left: order
            .iter()
            .map(|&k| (0..u.nrows()).map(|i| u[(i, k)]).collect())
            .collect(),
    }
}

pub(crate) struct LeastSquares {
    pub solution: Vec<Complex64>,
    pub rank: usize,
}

/// Minimises `|A x - b|` over columns rescaled to unit norm; singular values
/// below `rcond * sigma_max` (of the rescaled matrix) count as rank loss.
pub(crate) fn least_squares(a: &DMatrix<Complex64>, b: &[Complex64], rcond: f64) -> LeastSquares {
    let cols = a.ncols();
    let norms: Vec<f64> = (0..cols)
        .map(|j| a.column(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let scaled = DMatrix::from_fn(a.nrows(), cols, |i, j| {
        if norms[j] > 0.0 {
            a[(i, j)] / norms[j]
        } else {
            a[(i, j)]
        }
    });
    let dec = svd(&scaled);
    let smax = dec.values.first().copied().unwrap_or(0.0);
    let rank = dec.values.iter().filter(|&&s| s > rcond * smax).count();
    let bv = DVector::from_column_slice(b);
    let mut x = vec![Complex64::new(0.0, 0.0); cols];
    for k in 0..rank {
        let coeff: Complex64 = dec.left[k]
            .iter()
            .zip(bv.iter())
            .map(|(u, bi)| u.conj() * bi)
            .sum::<Complex64>()
            / dec.values[k];
        for (xj, r) in x.iter_mut().zip(&dec.right[k]) {
            *xj += coeff * r;
        }
    }
    for j in 0..cols {
        if norms[j] > 0.0 {
            x[j] /= norms[j];
        }
    }
    LeastSquares { solution: x, rank }
}
