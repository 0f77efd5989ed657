//! Second-order theta functions and the Kummer map.
//!
//! The basis is `theta_j(z) = theta[sigma_j, 0](2z | 2 tau)` over the `2^g`
//! half-integer characteristics `sigma_j`, ordered lexicographically. With
//! this basis the addition formula
//! `theta(z + w) theta(z - w) = sum_j theta_j(z) theta_j(w)` holds with unit
//! coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::period::PeriodMatrix;
use crate::point::ComplexPoint;
use crate::theta::{self, DerivativeSpec};

#[derive(Clone, Debug)]
pub struct SecondOrderBasis {
    pm: PeriodMatrix,
    doubled: PeriodMatrix,
    labels: Vec<Vec<f64>>,
}

impl SecondOrderBasis {
    pub fn new(pm: PeriodMatrix) -> Self {
        let g = pm.g();
        let labels = (0..1usize << g)
            .map(|j| (0..g).map(|k| 0.5 * ((j >> (g - 1 - k)) & 1) as f64).collect())
            .collect();
        SecondOrderBasis {
            doubled: pm.doubled(),
            pm,
            labels,
        }
    }

    pub fn period_matrix(&self) -> &PeriodMatrix {
        &self.pm
    }

    pub fn g(&self) -> usize {
        self.pm.g()
    }

    /// Number of basis sections, `2^g`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Vec<f64>] {
        &self.labels
    }

    /// `(theta_0(z), ..., theta_N(z))`.
    pub fn second_order_values(&self, z: &ComplexPoint, eps: f64) -> Result<Vec<Complex64>> {
        self.values_with(z, &DerivativeSpec::none(), eps)
    }

    /// Directional derivative `(W . grad theta_j)(z)` of every basis section.
    pub fn second_order_derivative(
        &self,
        z: &ComplexPoint,
        direction: &ComplexPoint,
        eps: f64,
    ) -> Result<Vec<Complex64>> {
        direction.check_dim(self.g(), "derivative direction")?;
        // d/dz of f(2z) along W is f' along 2W
        self.values_with(z, &DerivativeSpec::single(direction * 2.0), eps)
    }

    fn values_with(
        &self,
        z: &ComplexPoint,
        deriv: &DerivativeSpec,
        eps: f64,
    ) -> Result<Vec<Complex64>> {
        z.check_dim(self.g(), "kummer argument")?;
        let doubled_z = z * 2.0;
        let zero = vec![0.0; self.g()];
        self.labels
            .iter()
            .map(|sigma| theta::theta_char(&self.doubled, sigma, &zero, &doubled_z, deriv, eps))
            .collect()
    }

    /// The Kummer point `[theta_0(z) : ... : theta_N(z)]`.
    pub fn kummer(&self, z: &ComplexPoint, eps: f64) -> Result<ProjectivePoint> {
        let values = self.second_order_values(z, eps)?;
        let max_modulus = values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max_modulus < 1e3 * eps {
            return Err(Error::DegenerateKummerPoint { max_modulus });
        }
        ProjectivePoint::new(values)
    }

    /// `|theta(z+w) theta(z-w) - sum_j theta_j(z) theta_j(w)| / max(1, |theta(z+w) theta(z-w)|)`.
    pub fn addition_residual(&self, z: &ComplexPoint, w: &ComplexPoint, eps: f64) -> Result<f64> {
        self.addition_residual_scaled(z, w, None, eps)
    }

    /// As [`Self::addition_residual`], optionally with one basis section
    /// rescaled; used to confirm the check is sensitive to basis scaling.
    pub fn addition_residual_scaled(
        &self,
        z: &ComplexPoint,
        w: &ComplexPoint,
        rescale: Option<(usize, f64)>,
        eps: f64,
    ) -> Result<f64> {
        let none = DerivativeSpec::none();
        let lhs = theta::theta(&self.pm, &(z + w), &none, eps)?
            * theta::theta(&self.pm, &(z - w), &none, eps)?;
        let mut tz = self.second_order_values(z, eps)?;
        let tw = self.second_order_values(w, eps)?;
        if let Some((j, s)) = rescale {
            tz[j] *= s;
        }
        let rhs: Complex64 = tz.iter().zip(&tw).map(|(a, b)| a * b).sum();
        Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
    }
}

/// A point of `P^(2^g - 1)`, scaled so the largest-modulus coordinate is 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProjectiveJson", into = "ProjectiveJson")]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectiveJson {
    pub coords_re: Vec<f64>,
    pub coords_im: Vec<f64>,
}

impl TryFrom<ProjectiveJson> for ProjectivePoint {
    type Error = Error;

    fn try_from(json: ProjectiveJson) -> Result<Self> {
        if json.coords_re.len() != json.coords_im.len() {
            return Err(Error::DimensionMismatch {
                what: "projective coords",
                expected: json.coords_re.len(),
                got: json.coords_im.len(),
            });
        }
        ProjectivePoint::new(
            json.coords_re
                .iter()
                .zip(&json.coords_im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<ProjectivePoint> for ProjectiveJson {
    fn from(p: ProjectivePoint) -> Self {
        ProjectiveJson {
            coords_re: p.coords.iter().map(|c| c.re).collect(),
            coords_im: p.coords.iter().map(|c| c.im).collect(),
        }
    }
}

impl ProjectivePoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("projective point"));
        }
        let (idx, max) = coords
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((0, 0.0), |acc, (i, m)| if m > acc.1 { (i, m) } else { acc });
        if max == 0.0 {
            return Err(Error::InvalidArgument("projective point is zero".into()));
        }
        let pivot = coords[idx];
        let mut coords: Vec<Complex64> = coords.iter().map(|c| c / pivot).collect();
        coords[idx] = Complex64::new(1.0, 0.0);
        Ok(ProjectivePoint { coords })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }
}

/// Sine of the angle between the lines `p` and `q`: zero iff they agree
/// projectively, one iff they are orthogonal.
pub fn projective_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> f64 {
    raw_projective_distance(p.coords(), q.coords())
}

/// Norm of the part of `q/|q|` orthogonal to `p`; unlike
/// `sqrt(1 - cos^2)` this keeps full precision for nearby points.
pub(crate) fn raw_projective_distance(p: &[Complex64], q: &[Complex64]) -> f64 {
    let np = p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nq = q.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let inner: Complex64 = p.iter().zip(q).map(|(a, b)| a.conj() * b).sum::<Complex64>() / (np * nq);
    p.iter()
        .zip(q)
        .map(|(a, b)| (b / nq - a / np * inner).norm_sqr())
        .sum::<f64>()
        .sqrt()
        .min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn genus_one_has_two_sections() {
        let pm = PeriodMatrix::new(1, vec![vec![c(0.0, 1.0)]]).unwrap();
        let basis = SecondOrderBasis::new(pm);
        let v = basis.second_order_values(&ComplexPoint::zeros(1), 1e-12).unwrap();
        assert_eq!(v.len(), 2);
        basis.kummer(&ComplexPoint::zeros(1), 1e-12).unwrap();
    }

    #[test]
    fn label_order_is_lexicographic() {
        let pm = PeriodMatrix::from_re_im(
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let basis = SecondOrderBasis::new(pm);
        assert_eq!(
            basis.labels(),
            &[vec![0.0, 0.0], vec![0.0, 0.5], vec![0.5, 0.0], vec![0.5, 0.5]]
        );
    }

    #[test]
    fn distance_basics() {
        let p = ProjectivePoint::new(vec![c(1.0, 2.0), c(-0.5, 0.1)]).unwrap();
        assert!(projective_distance(&p, &p) < 1e-15);
        let p3 = ProjectivePoint::new(vec![c(3.0, 6.0), c(-1.5, 0.3)]).unwrap();
        assert!(projective_distance(&p, &p3) < 1e-15);
        let e0 = ProjectivePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e1 = ProjectivePoint::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((projective_distance(&e0, &e1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_pins_largest_entry() {
        let p = ProjectivePoint::new(vec![c(0.1, 0.0), c(0.0, -4.0)]).unwrap();
        assert_eq!(p.coords()[1], c(1.0, 0.0));
        assert!(ProjectivePoint::new(vec![c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn projective_json_round_trip() {
        let p = ProjectivePoint::new(vec![c(0.1, 0.3), c(0.0, -4.0)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("coords_re"));
        let back: ProjectivePoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
