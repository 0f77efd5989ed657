use std::ops::{Add, Mul};

use num_complex::Complex64;

/// A power series in one formal variable, truncated after `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

impl TruncatedSeries {
    /// Coefficients `c_0..=c_order`; must be non-empty.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "series needs a constant term");
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![Complex64::new(0.0, 0.0); order + 1],
        }
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        TruncatedSeries {
            coeffs: (0..=order).map(|i| self.coeff(i)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Coefficient `n` of the product, without forming the rest.
    pub fn product_coeff(&self, other: &Self, n: usize) -> Complex64 {
        (0..=n).map(|i| self.coeff(i) * other.coeff(n - i)).sum()
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;

    /// Truncated to the smaller of the two orders.
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=order).map(|n| self.product_coeff(rhs, n)).collect(),
        }
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=order).map(|n| self.coeff(n) + rhs.coeff(n)).collect(),
        }
    }
}
