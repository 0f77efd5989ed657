use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `C^g`, stored as its coordinate vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointJson", into = "PointJson")]
pub struct ComplexPoint {
    coords: Vec<Complex64>,
}

/// Wire form `{"re": [...], "im": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl TryFrom<PointJson> for ComplexPoint {
    type Error = Error;

    fn try_from(json: PointJson) -> Result<Self> {
        if json.re.len() != json.im.len() {
            return Err(Error::DimensionMismatch {
                what: "point re/im",
                expected: json.re.len(),
                got: json.im.len(),
            });
        }
        ComplexPoint::new(
            json.re
                .iter()
                .zip(&json.im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<ComplexPoint> for PointJson {
    fn from(p: ComplexPoint) -> Self {
        PointJson {
            re: p.coords.iter().map(|c| c.re).collect(),
            im: p.coords.iter().map(|c| c.im).collect(),
        }
    }
}

impl ComplexPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("complex point"));
        }
        Ok(ComplexPoint { coords })
    }

    pub fn zeros(g: usize) -> Self {
        ComplexPoint {
            coords: vec![Complex64::new(0.0, 0.0); g],
        }
    }

    pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
        PointJson {
            re: re.to_vec(),
            im: im.to_vec(),
        }
        .try_into()
    }

    pub fn real(re: &[f64]) -> Self {
        ComplexPoint {
            coords: re.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Unit vector along coordinate `i`.
    pub fn basis(g: usize, i: usize) -> Self {
        let mut p = Self::zeros(g);
        p.coords[i] = Complex64::new(1.0, 0.0);
        p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.coords
    }

    pub fn re(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.im).collect()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexPoint {
            coords: self.coords.iter().map(|&c| c * s).collect(),
        }
    }

    /// Bilinear pairing `sum_i v_i * self_i` with a real vector.
    pub fn pair_real(&self, v: &[f64]) -> Complex64 {
        self.coords.iter().zip(v).map(|(c, &x)| c * x).sum()
    }

    pub(crate) fn check_dim(&self, g: usize, what: &'static str) -> Result<()> {
        if self.dim() != g {
            return Err(Error::DimensionMismatch {
                what,
                expected: g,
                got: self.dim(),
            });
        }
        Ok(())
    }

    /// Largest coordinate distance; used by exact-arithmetic checks.
    pub fn max_abs_diff(&self, other: &ComplexPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexPoint {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.coords[i]
    }
}

impl<'a> Add<&'a ComplexPoint> for &'a ComplexPoint {
    type Output = ComplexPoint;

    fn add(self, rhs: &ComplexPoint) -> ComplexPoint {
        debug_assert_eq!(self.dim(), rhs.dim());
        ComplexPoint {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexPoint> for &'a ComplexPoint {
    type Output = ComplexPoint;

    fn sub(self, rhs: &ComplexPoint) -> ComplexPoint {
        debug_assert_eq!(self.dim(), rhs.dim());
        ComplexPoint {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Add for ComplexPoint {
    type Output = ComplexPoint;

    fn add(self, rhs: ComplexPoint) -> ComplexPoint {
        &self + &rhs
    }
}

impl Sub for ComplexPoint {
    type Output = ComplexPoint;

    fn sub(self, rhs: ComplexPoint) -> ComplexPoint {
        &self - &rhs
    }
}

impl AddAssign<&ComplexPoint> for ComplexPoint {
    fn add_assign(&mut self, rhs: &ComplexPoint) {
        for (a, b) in self.coords.iter_mut().zip(&rhs.coords) {
            *a += b;
        }
    }
}

impl Neg for &ComplexPoint {
    type Output = ComplexPoint;

    fn neg(self) -> ComplexPoint {
        ComplexPoint {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for ComplexPoint {
    type Output = ComplexPoint;

    fn neg(self) -> ComplexPoint {
        -&self
    }
}

impl Mul<f64> for &ComplexPoint {
    type Output = ComplexPoint;

    fn mul(self, s: f64) -> ComplexPoint {
        ComplexPoint {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }
}

impl Mul<f64> for ComplexPoint {
    type Output = ComplexPoint;

    fn mul(self, s: f64) -> ComplexPoint {
        &self * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let p = ComplexPoint::from_parts(&[1.0, -2.5], &[0.0, 0.25]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"re":[1.0,-2.5],"im":[0.0,0.25]}"#);
        let back: ComplexPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let err = serde_json::from_str::<ComplexPoint>(r#"{"re":[1.0],"im":[0.0,1.0]}"#);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ComplexPoint::new(vec![Complex64::new(f64::NAN, 0.0)]).is_err());
    }
}
