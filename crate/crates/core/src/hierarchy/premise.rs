//! Numerical check of the degenerate-secant premises:
//! (i) `K(u), K(b_1), ..., K(b_m)` span an `m`-plane tangent at `K(u)`;
//! (ii) for each `mu in {-b_1, ..., -b_{m-1}}` the points
//! `x - (b_m + mu)/2`, `x in {u, -u, b_1, ..., b_m}`, span an `m`-plane.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kummer::SecondOrderBasis;
use crate::linalg;
use crate::period::PeriodMatrix;
use crate::point::ComplexPoint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PremiseReport {
    /// `sigma_{m+2} / sigma_1` of `[K(u), d_W K(u), K(b_1), ..., K(b_m)]`.
    pub tangency: f64,
    /// The tangent direction used (supplied, or fitted when absent).
    pub direction: ComplexPoint,
    /// One residual per `mu = -b_j`, `j < m`.
    pub shifted: Vec<f64>,
}

impl PremiseReport {
    pub fn max_residual(&self) -> f64 {
        self.shifted.iter().copied().fold(self.tangency, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_residual() <= tolerance
    }
}

fn column_normalized(cols: Vec<Vec<Complex64>>) -> DMatrix<Complex64> {
    let rows = cols[0].len();
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i] / norms[j])
}

/// `sigma_last / sigma_1` after scaling every column to unit norm.
fn normalized_ratio(cols: Vec<Vec<Complex64>>) -> f64 {
    let dec = linalg::svd(&column_normalized(cols));
    dec.values.last().copied().unwrap_or(0.0) / dec.values[0]
}

/// Least-squares fit of `K(b_m)` against `K(u)`, the partial derivatives of
/// `K` at `u` and `K(b_j)` for `j < m`; the derivative coefficients are the
/// tangent direction.
pub fn fit_tangent_direction(
    basis: &SecondOrderBasis,
    u: &ComplexPoint,
    b: &[ComplexPoint],
    eps: f64,
) -> Result<ComplexPoint> {
    let g = basis.g();
    let mut cols = vec![basis.second_order_values(u, eps)?];
    for i in 0..g {
        cols.push(basis.second_order_derivative(u, &ComplexPoint::basis(g, i), eps)?);
    }
    for bj in &b[..b.len() - 1] {
        cols.push(basis.second_order_values(bj, eps)?);
    }
    let target = basis.second_order_values(&b[b.len() - 1], eps)?;
    let a = DMatrix::from_fn(target.len(), cols.len(), |i, j| cols[j][i]);
    let ls = linalg::least_squares(&a, &target, 1e-12);
    ComplexPoint::new(ls.solution[1..=g].to_vec())
}

pub fn premise_check(
    pm: &PeriodMatrix,
    m: usize,
    u: &ComplexPoint,
    b: &[ComplexPoint],
    direction: Option<&ComplexPoint>,
    eps: f64,
) -> Result<PremiseReport> {
    let g = pm.g();
    if m == 0 || b.len() != m {
        return Err(Error::DimensionMismatch {
            what: "b points",
            expected: m.max(1),
            got: b.len(),
        });
    }
    if m + 2 > 1 << g {
        return Err(Error::InvalidArgument(format!(
            "m = {m} is too large for genus {g}"
        )));
    }
    u.check_dim(g, "u")?;
    for p in b {
        p.check_dim(g, "b point")?;
    }
    let basis = SecondOrderBasis::new(pm.clone());
    let direction = match direction {
        Some(w) => {
            w.check_dim(g, "tangent direction")?;
            if w.is_zero() {
                return Err(Error::InvalidArgument("tangent direction is zero".into()));
            }
            w.clone()
        }
        None => fit_tangent_direction(&basis, u, b, eps)?,
    };
    let mut cols = vec![
        basis.second_order_values(u, eps)?,
        basis.second_order_derivative(u, &direction, eps)?,
    ];
    for p in b {
        cols.push(basis.second_order_values(p, eps)?);
    }
    let tangency = normalized_ratio(cols);

    let mut shifted = Vec::with_capacity(m - 1);
    for mu in b[..m - 1].iter().map(|bj| -bj) {
        let t = &(&b[m - 1] + &mu) * -0.5;
        let mut pts = vec![u + &t, &(-u) + &t];
        pts.extend(b.iter().map(|p| p + &t));
        let cols = pts
            .iter()
            .map(|p| basis.second_order_values(p, eps))
            .collect::<Result<Vec<_>>>()?;
        shifted.push(normalized_ratio(cols));
    }
    Ok(PremiseReport {
        tangency,
        direction,
        shifted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn pm() -> PeriodMatrix {
        PeriodMatrix::from_re_im(
            &[vec![0.2, -0.1], vec![-0.1, 0.05]],
            &[vec![1.1, 0.15], vec![0.15, 0.95]],
        )
        .unwrap()
    }

    #[test]
    fn m1_has_no_shifted_premises() {
        let mut rng = sampling::rng(1);
        let u = sampling::box_point(2, 0.3, &mut rng);
        let b = vec![sampling::box_point(2, 0.3, &mut rng)];
        let r = premise_check(&pm(), 1, &u, &b, None, 1e-12).unwrap();
        assert!(r.shifted.is_empty());
    }

    #[test]
    fn random_data_fails() {
        let mut rng = sampling::rng(2);
        let mut failures = 0;
        for _ in 0..10 {
            let u = sampling::box_point(2, 0.4, &mut rng);
            let b = vec![sampling::box_point(2, 0.4, &mut rng)];
            let w = sampling::box_point(2, 1.0, &mut rng);
            let r = premise_check(&pm(), 1, &u, &b, Some(&w), 1e-12).unwrap();
            failures += (r.tangency >= 1e-3) as usize;
        }
        assert!(failures >= 9);
    }

    #[test]
    fn random_point_is_off_the_tangent_hyperplane() {
        // with the fitted direction the test reduces to K(b) lying in the
        // tangent hyperplane at K(u), which a random b misses
        let mut rng = sampling::rng(3);
        let u = sampling::box_point(2, 0.3, &mut rng);
        let b = vec![sampling::box_point(2, 0.3, &mut rng)];
        let r = premise_check(&pm(), 1, &u, &b, None, 1e-12).unwrap();
        assert!(r.tangency > 1e-4);
    }
}
