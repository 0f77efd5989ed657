use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::period::PeriodMatrix;
use crate::point::ComplexPoint;
use crate::theta::MAX_DERIVATIVE_ORDER;

/// Truncated formal curve and coefficient series.
///
/// The equation being solved is
/// `sum_x alpha_x(eps) theta(z + x + C/2) theta(z - x - C/2) = 0` over
/// `x in {u, -u, b_1, ..., b_m}`, with `C(eps) = sum_j eps^j W^(j)` and
/// `alpha_u = 1 + sum_i alpha1[i-1] eps^i`, `alpha_{-u} = -1`,
/// `alpha_{b_j} = sum_i alphaj[j-1][i-1] eps^i` for `j < m`, `alpha_{b_m} = eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyState {
    pub pm: PeriodMatrix,
    pub m: usize,
    pub u: ComplexPoint,
    pub b: Vec<ComplexPoint>,
    /// Truncation order `S`.
    pub order: usize,
    /// `w[j - 1] = W^(j)`, length `S`.
    pub w: Vec<ComplexPoint>,
    pub alpha1: Vec<Complex64>,
    pub alphaj: Vec<Vec<Complex64>>,
    /// Post-solve residual for each solved order, starting at 1.
    pub per_order_residuals: Vec<f64>,
    /// Numerical rank of each order's least-squares system.
    pub solve_ranks: Vec<usize>,
}

/// Minimal input describing a degenerate secant: `u`, `b_1..b_m` and an
/// initial tangent direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySeed {
    pub m: usize,
    pub u: ComplexPoint,
    pub b: Vec<ComplexPoint>,
    pub w1: ComplexPoint,
}

/// Minimum lattice distance of `2u` from the origin.
const TWO_U_FLOOR: f64 = 1e-8;

impl HierarchyState {
    pub fn new(
        pm: PeriodMatrix,
        m: usize,
        u: ComplexPoint,
        b: Vec<ComplexPoint>,
        w1: ComplexPoint,
        order: usize,
    ) -> Result<Self> {
        if order == 0 || order > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderTooHigh {
                order,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        let g = pm.g();
        let mut w = vec![ComplexPoint::zeros(g); order];
        w[0] = w1;
        let state = HierarchyState {
            m,
            u,
            b,
            order,
            w,
            alpha1: vec![Complex64::new(0.0, 0.0); order],
            alphaj: vec![vec![Complex64::new(0.0, 0.0); order]; m.saturating_sub(1)],
            per_order_residuals: Vec::new(),
            solve_ranks: Vec::new(),
            pm,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn from_seed(pm: PeriodMatrix, seed: &HierarchySeed, order: usize) -> Result<Self> {
        Self::new(pm, seed.m, seed.u.clone(), seed.b.clone(), seed.w1.clone(), order)
    }

    pub fn g(&self) -> usize {
        self.pm.g()
    }

    /// Checks every structural invariant; deserialized states should pass
    /// through here before use.
    pub fn validate(&self) -> Result<()> {
        let g = self.pm.g();
        if self.m == 0 {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        if self.b.len() != self.m {
            return Err(Error::DimensionMismatch {
                what: "b points",
                expected: self.m,
                got: self.b.len(),
            });
        }
        self.u.check_dim(g, "u")?;
        for p in &self.b {
            p.check_dim(g, "b point")?;
        }
        if self.order == 0 || self.order > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderTooHigh {
                order: self.order,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        let len_ok = self.w.len() == self.order
            && self.alpha1.len() == self.order
            && self.alphaj.len() == self.m - 1
            && self.alphaj.iter().all(|a| a.len() == self.order);
        if !len_ok {
            return Err(Error::InvalidArgument(format!(
                "coefficient lists must have length equal to the order {}",
                self.order
            )));
        }
        for d in &self.w {
            d.check_dim(g, "curve direction")?;
        }
        if self.w[0].norm() == 0.0 {
            return Err(Error::InvalidArgument(
                "first curve direction W^(1) must be nonzero".into(),
            ));
        }
        let two_u = &self.u * 2.0;
        let d = self.pm.lattice_distance(&two_u, &ComplexPoint::zeros(g));
        if d < TWO_U_FLOOR {
            return Err(Error::InvalidArgument(format!(
                "2u lies on the period lattice (distance {d:e})"
            )));
        }
        Ok(())
    }

    /// Grows (or shrinks) the truncation order, padding with zeros.
    pub fn with_order(mut self, order: usize) -> Result<Self> {
        if order == 0 || order > MAX_DERIVATIVE_ORDER {
            return Err(Error::OrderTooHigh {
                order,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        let g = self.g();
        let zero = Complex64::new(0.0, 0.0);
        self.w.resize(order, ComplexPoint::zeros(g));
        self.alpha1.resize(order, zero);
        for a in &mut self.alphaj {
            a.resize(order, zero);
        }
        self.per_order_residuals.truncate(order);
        self.solve_ranks.truncate(order);
        self.order = order;
        Ok(self)
    }

    /// The translation bases with their coefficient series, truncated at
    /// `upto`: `(x, [alpha_{x,0}, ..., alpha_{x,upto}])`.
    pub(crate) fn bases(&self, upto: usize) -> Vec<(ComplexPoint, Vec<Complex64>)> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let series = |head: Complex64, tail: &dyn Fn(usize) -> Complex64| -> Vec<Complex64> {
            (0..=upto)
                .map(|i| if i == 0 { head } else { tail(i) })
                .collect()
        };
        let coeff = |v: &[Complex64], i: usize| v.get(i - 1).copied().unwrap_or(zero);
        let mut out = vec![
            (self.u.clone(), series(one, &|i| coeff(&self.alpha1, i))),
            (-&self.u, series(-one, &|_| zero)),
        ];
        for j in 0..self.m - 1 {
            out.push((self.b[j].clone(), series(zero, &|i| coeff(&self.alphaj[j], i))));
        }
        out.push((
            self.b[self.m - 1].clone(),
            series(zero, &|i| if i == 1 { one } else { zero }),
        ));
        out
    }

    /// Curve directions truncated (or zero-padded) to `upto` entries.
    pub(crate) fn directions(&self, upto: usize) -> Vec<ComplexPoint> {
        (0..upto)
            .map(|j| {
                self.w
                    .get(j)
                    .cloned()
                    .unwrap_or_else(|| ComplexPoint::zeros(self.g()))
            })
            .collect()
    }

    /// The degenerate-secant datum this state was seeded from.
    pub fn seed(&self) -> HierarchySeed {
        HierarchySeed {
            m: self.m,
            u: self.u.clone(),
            b: self.b.clone(),
            w1: self.w[0].clone(),
        }
    }
}
