use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::ComplexPoint;

/// Relative tolerance for the symmetry check of `tau`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-14;

/// A point of the Siegel upper half-space, together with the real data the
/// theta engine needs: `Im(tau)`, its inverse, and its upper Cholesky factor.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "PeriodMatrixJson", into = "PeriodMatrixJson")]
pub struct PeriodMatrix {
    g: usize,
    tau: DMatrix<Complex64>,
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    im_inv: DMatrix<f64>,
    /// Upper triangular `T` with `Im(tau) = T^T T`.
    chol: DMatrix<f64>,
    lambda_min: f64,
    lambda_max: f64,
    digest: u64,
}

/// Wire form `{"g": int, "tau_re": [[...]], "tau_im": [[...]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodMatrixJson {
    pub g: usize,
    pub tau_re: Vec<Vec<f64>>,
    pub tau_im: Vec<Vec<f64>>,
}

impl TryFrom<PeriodMatrixJson> for PeriodMatrix {
    type Error = Error;

    fn try_from(json: PeriodMatrixJson) -> Result<Self> {
        let g = json.g;
        let check_rows = |rows: &Vec<Vec<f64>>, what: &'static str| -> Result<()> {
            if rows.len() != g {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: g,
                    got: rows.len(),
                });
            }
            for r in rows {
                if r.len() != g {
                    return Err(Error::DimensionMismatch {
                        what,
                        expected: g,
                        got: r.len(),
                    });
                }
            }
            Ok(())
        };
        check_rows(&json.tau_re, "tau_re")?;
        check_rows(&json.tau_im, "tau_im")?;
        let entries = (0..g)
            .map(|i| {
                (0..g)
                    .map(|j| Complex64::new(json.tau_re[i][j], json.tau_im[i][j]))
                    .collect()
            })
            .collect::<Vec<Vec<_>>>();
        PeriodMatrix::new(g, entries)
    }
}

impl From<PeriodMatrix> for PeriodMatrixJson {
    fn from(pm: PeriodMatrix) -> Self {
        let g = pm.g;
        PeriodMatrixJson {
            g,
            tau_re: (0..g).map(|i| (0..g).map(|j| pm.tau[(i, j)].re).collect()).collect(),
            tau_im: (0..g).map(|i| (0..g).map(|j| pm.tau[(i, j)].im).collect()).collect(),
        }
    }
}

impl fmt::Debug for PeriodMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodMatrix")
            .field("g", &self.g)
            .field("tau", &self.tau)
            .field("lambda_min", &self.lambda_min)
            .finish()
    }
}

impl PartialEq for PeriodMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g && self.tau == other.tau
    }
}

impl PeriodMatrix {
    /// Validates symmetry and positivity of `Im(tau)`; the stored matrix is
    /// the symmetrized input.
    pub fn new(g: usize, entries: Vec<Vec<Complex64>>) -> Result<Self> {
        if g == 0 {
            return Err(Error::InvalidArgument("genus must be positive".into()));
        }
        if entries.len() != g || entries.iter().any(|r| r.len() != g) {
            return Err(Error::DimensionMismatch {
                what: "period matrix",
                expected: g,
                got: entries.len(),
            });
        }
        if entries
            .iter()
            .flatten()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("period matrix"));
        }
        let raw = DMatrix::from_fn(g, g, |i, j| entries[i][j]);
        let scale = raw.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut asymmetry: f64 = 0.0;
        for i in 0..g {
            for j in 0..g {
                asymmetry = asymmetry.max((raw[(i, j)] - raw[(j, i)]).norm());
            }
        }
        if asymmetry > SYMMETRY_TOLERANCE * scale {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let tau = DMatrix::from_fn(g, g, |i, j| (raw[(i, j)] + raw[(j, i)]) * 0.5);
        let re = tau.map(|c| c.re);
        let im = tau.map(|c| c.im);

        let eig = nalgebra::SymmetricEigen::new(im.clone());
        let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lambda_min > 0.0) {
            return Err(Error::NotPositiveDefinite { lambda_min });
        }
        let chol = nalgebra::Cholesky::new(im.clone())
            .ok_or(Error::NotPositiveDefinite { lambda_min })?
            .l()
            .transpose();
        let im_inv = im
            .clone()
            .try_inverse()
            .ok_or(Error::NotPositiveDefinite { lambda_min })?;

        let mut hasher = DefaultHasher::new();
        g.hash(&mut hasher);
        for c in tau.iter() {
            c.re.to_bits().hash(&mut hasher);
            c.im.to_bits().hash(&mut hasher);
        }
        Ok(PeriodMatrix {
            g,
            tau,
            re,
            im,
            im_inv,
            chol,
            lambda_min,
            lambda_max,
            digest: hasher.finish(),
        })
    }

    pub fn from_re_im(tau_re: &[Vec<f64>], tau_im: &[Vec<f64>]) -> Result<Self> {
        PeriodMatrixJson {
            g: tau_re.len(),
            tau_re: tau_re.to_vec(),
            tau_im: tau_im.to_vec(),
        }
        .try_into()
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn tau(&self, i: usize, j: usize) -> Complex64 {
        self.tau[(i, j)]
    }

    pub fn tau_matrix(&self) -> &DMatrix<Complex64> {
        &self.tau
    }

    pub fn re_matrix(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im_matrix(&self) -> &DMatrix<f64> {
        &self.im
    }

    pub fn im_inverse(&self) -> &DMatrix<f64> {
        &self.im_inv
    }

    pub fn cholesky_upper(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// The period matrix `2 tau` used by the second-order theta functions.
    pub fn doubled(&self) -> PeriodMatrix {
        let g = self.g;
        PeriodMatrix::new(
            g,
            (0..g)
                .map(|i| (0..g).map(|j| self.tau[(i, j)] * 2.0).collect())
                .collect(),
        )
        .expect("2*tau inherits validity from tau")
    }

    /// `tau v` for a real vector `v`.
    pub fn tau_times(&self, v: &[f64]) -> ComplexPoint {
        let g = self.g;
        let coords = (0..g)
            .map(|i| (0..g).map(|j| self.tau[(i, j)] * v[j]).sum())
            .collect();
        ComplexPoint::new(coords).expect("finite")
    }

    /// The lattice vector `m + tau n`.
    pub fn lattice_vector(&self, m: &[i64], n: &[i64]) -> ComplexPoint {
        let nf: Vec<f64> = n.iter().map(|&x| x as f64).collect();
        let mut p = self.tau_times(&nf);
        let shift = ComplexPoint::real(&m.iter().map(|&x| x as f64).collect::<Vec<_>>());
        p += &shift;
        p
    }

    /// The half-period `(e + tau f) / 2` selected by `lift = (e, f)`.
    pub fn half_period(&self, lift: &Lift) -> Result<ComplexPoint> {
        if lift.bits.len() != 2 * self.g {
            return Err(Error::DimensionMismatch {
                what: "lift bits",
                expected: 2 * self.g,
                got: lift.bits.len(),
            });
        }
        let e: Vec<f64> = lift.bits[..self.g].iter().map(|&b| 0.5 * b as f64).collect();
        let f: Vec<f64> = lift.bits[self.g..].iter().map(|&b| 0.5 * b as f64).collect();
        let mut p = self.tau_times(&f);
        p += &ComplexPoint::real(&e);
        Ok(p)
    }

    /// Integer coordinates `(m, n)` with `z - m - tau n` in the centred cell
    /// (`Im` coordinate in `[-1/2, 1/2]^g` of the `tau` basis, same for `Re`).
    pub fn reduce(&self, z: &ComplexPoint) -> LatticeReduction {
        let g = self.g;
        let y = z.im();
        let s: Vec<f64> = (0..g)
            .map(|i| (0..g).map(|j| self.im_inv[(i, j)] * y[j]).sum())
            .collect();
        let n: Vec<i64> = s.iter().map(|v| v.round() as i64).collect();
        let shifted = z - &self.lattice_vector(&vec![0; g], &n);
        let m: Vec<i64> = shifted.re().iter().map(|v| v.round() as i64).collect();
        let point = &shifted - &ComplexPoint::real(&m.iter().map(|&x| x as f64).collect::<Vec<_>>());
        LatticeReduction { point, m, n }
    }

    /// Distance between `z` and `w` in `C^g / (Z^g + tau Z^g)`, taking the
    /// minimum over the reduced difference and its neighbouring cells.
    pub fn lattice_distance(&self, z: &ComplexPoint, w: &ComplexPoint) -> f64 {
        let g = self.g;
        let d = self.reduce(&(z - w)).point;
        let mut best = d.norm();
        let count = 3usize.pow(2 * g as u32);
        for code in 0..count {
            let mut c = code;
            let mut digits = vec![0i64; 2 * g];
            for slot in digits.iter_mut() {
                *slot = (c % 3) as i64 - 1;
                c /= 3;
            }
            let shift = self.lattice_vector(&digits[..g], &digits[g..]);
            best = best.min((&d - &shift).norm());
        }
        best
    }
}

/// Result of [`PeriodMatrix::reduce`]: `z = point + m + tau n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeReduction {
    pub point: ComplexPoint,
    pub m: Vec<i64>,
    pub n: Vec<i64>,
}

/// A half-period of `C^g / (Z^g + tau Z^g)` given by `2g` bits: the first `g`
/// select `e_k / 2`, the last `g` select `tau e_k / 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Lift {
    bits: Vec<u8>,
}

impl Lift {
    pub fn zero(g: usize) -> Self {
        Lift { bits: vec![0; 2 * g] }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("lift bits must be 0 or 1".into()));
        }
        Ok(Lift { bits })
    }

    /// The lift with index `code`, most significant bit first.
    pub fn from_index(g: usize, code: usize) -> Self {
        let n = 2 * g;
        Lift {
            bits: (0..n).map(|k| ((code >> (n - 1 - k)) & 1) as u8).collect(),
        }
    }

    /// All `2^(2g)` lifts in index order.
    pub fn all(g: usize) -> Vec<Lift> {
        (0..1usize << (2 * g)).map(|c| Lift::from_index(g, c)).collect()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }
}

impl fmt::Display for Lift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Lift {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidArgument(format!("bad lift bit {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Lift::from_bits(bits)
    }
}

impl TryFrom<String> for Lift {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Lift> for String {
    fn from(l: Lift) -> String {
        l.to_string()
    }
}
