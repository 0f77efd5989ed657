use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::assemble::{assemble_p, design_row, set_unknowns, without_unknowns};
use super::state::HierarchyState;
use crate::error::{Error, Result};
use crate::linalg;
use crate::par::*;
use crate::point::ComplexPoint;

/// Orders whose post-solve residual exceeds this abort the run.
pub const ABORT_RESIDUAL: f64 = 1e-4;
/// A run succeeds when every order's residual is at most this.
pub const SUCCESS_RESIDUAL: f64 = 1e-7;
/// Relative singular-value cutoff of the unit-column design matrix.
const RANK_RCOND: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderSolution {
    pub order: usize,
    pub alpha1: Complex64,
    pub alphaj: Vec<Complex64>,
    pub direction: ComplexPoint,
    pub residual: f64,
    pub rank: usize,
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Solves for the order-`s` unknowns by least squares of `P_s` over the
/// samples, stores them in `state`, and records the post-solve residual
/// `rms(P_s) / max(rms(Q_s), rms(design entries))`.
pub fn solve_order(
    state: &mut HierarchyState,
    s: usize,
    samples: &[ComplexPoint],
    eps: f64,
) -> Result<OrderSolution> {
    state.validate()?;
    if s == 0 || s > state.order {
        return Err(Error::InvalidArgument(format!(
            "order {s} outside 1..={}",
            state.order
        )));
    }
    if s > state.per_order_residuals.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "orders below {s} have not been solved"
        )));
    }
    let g = state.g();
    let n_unknowns = g + state.m;
    if samples.len() < 2 * n_unknowns {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples for {n_unknowns} unknowns, got {}",
            2 * n_unknowns,
            samples.len()
        )));
    }
    for z in samples {
        z.check_dim(g, "sample point")?;
    }
    let base = without_unknowns(state, s);
    let rows: Vec<Result<(Complex64, Vec<Complex64>)>> = samples
        .par_iter()
        .map(|z| Ok((assemble_p(&base, s, z, eps)?, design_row(&base, z, eps)?)))
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let a = DMatrix::from_fn(rows.len(), n_unknowns, |i, j| rows[i].1[j]);
    let rhs: Vec<Complex64> = rows.iter().map(|r| -r.0).collect();
    let ls = linalg::least_squares(&a, &rhs, RANK_RCOND);
    if ls.rank < n_unknowns {
        return Err(Error::RankDeficient {
            order: s,
            rank: ls.rank,
            unknowns: n_unknowns,
        });
    }
    set_unknowns(state, s, &ls.solution)?;
    if s == 1 && state.w[0].norm() == 0.0 {
        return Err(Error::InvalidArgument(
            "solved first curve direction vanishes".into(),
        ));
    }

    let post: Vec<Result<Complex64>> = samples
        .par_iter()
        .map(|z| assemble_p(state, s, z, eps))
        .collect();
    let post = post.into_iter().collect::<Result<Vec<_>>>()?;
    let q_scale = rms(rows.iter().map(|r| r.0.norm()));
    let d_scale = rms(rows.iter().flat_map(|r| r.1.iter().map(|c| c.norm())));
    let residual = rms(post.iter().map(|c| c.norm())) / q_scale.max(d_scale).max(f64::MIN_POSITIVE);

    state.per_order_residuals.truncate(s - 1);
    state.solve_ranks.truncate(s - 1);
    state.per_order_residuals.push(residual);
    state.solve_ranks.push(ls.rank);
    Ok(OrderSolution {
        order: s,
        alpha1: state.alpha1[s - 1],
        alphaj: state.alphaj.iter().map(|a| a[s - 1]).collect(),
        direction: state.w[s - 1].clone(),
        residual,
        rank: ls.rank,
    })
}

/// Solves orders `1..=order` in sequence, aborting at the first order whose
/// residual exceeds [`ABORT_RESIDUAL`].
pub fn run_hierarchy(
    state: HierarchyState,
    order: usize,
    samples: &[ComplexPoint],
    eps: f64,
) -> Result<HierarchyState> {
    state.validate()?;
    let mut state = state.with_order(order)?;
    state.per_order_residuals.clear();
    state.solve_ranks.clear();
    for s in 1..=order {
        let sol = solve_order(&mut state, s, samples, eps)?;
        if !(sol.residual <= ABORT_RESIDUAL) {
            return Err(Error::HierarchyAborted {
                order: s,
                residual: sol.residual,
                state: Box::new(state),
            });
        }
    }
    Ok(state)
}

impl HierarchyState {
    /// Whether every solved order met [`SUCCESS_RESIDUAL`].
    pub fn succeeded(&self) -> bool {
        self.per_order_residuals.len() == self.order
            && self.per_order_residuals.iter().all(|&r| r <= SUCCESS_RESIDUAL)
    }
}
