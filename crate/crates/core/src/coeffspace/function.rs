use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `C^d`-valued analytic function stored as Taylor coefficients `a_0..a_N`
/// plus a certified bound on the weighted norm of everything not stored.
///
/// Coefficients are kept degree-major: the fiber vector of degree `n` is
/// `coeffs[n * d .. (n + 1) * d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionDescriptor", into = "FunctionDescriptor")]
pub struct CoeffFunction {
    fiber_dim: usize,
    coeffs: Vec<Complex64>,
    tail_bound: f64,
}

impl CoeffFunction {
    /// Builds a function from per-degree fiber vectors.
    pub fn new(fiber_dim: usize, coeffs: Vec<Vec<Complex64>>, tail_bound: f64) -> Result<Self> {
        if fiber_dim == 0 {
            return Err(Error::InvalidParameter("fiber dimension must be positive".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("at least one coefficient is required".into()));
        }
        if !(tail_bound.is_finite() && tail_bound >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail bound must be a nonnegative finite number, found {tail_bound}"
            )));
        }
        let mut flat = Vec::with_capacity(coeffs.len() * fiber_dim);
        for (n, c) in coeffs.into_iter().enumerate() {
            if c.len() != fiber_dim {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient of degree {n} has {} components, expected {fiber_dim}",
                    c.len()
                )));
            }
            flat.extend(c);
        }
        Ok(Self {
            fiber_dim,
            coeffs: flat,
            tail_bound,
        })
    }

    /// Scalar function (`d = 1`) from its Taylor coefficients.
    pub fn scalar(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "at least one coefficient is required");
        Self {
            fiber_dim: 1,
            coeffs,
            tail_bound: 0.0,
        }
    }

    pub(crate) fn from_flat(fiber_dim: usize, coeffs: Vec<Complex64>, tail_bound: f64) -> Self {
        debug_assert!(fiber_dim > 0 && !coeffs.is_empty() && coeffs.len().is_multiple_of(fiber_dim));
        Self {
            fiber_dim,
            coeffs,
            tail_bound,
        }
    }

    /// The constant function `z -> e`.
    pub fn constant(e: &[Complex64]) -> Self {
        Self::from_flat(e.len(), e.to_vec(), 0.0)
    }

    pub fn zero(fiber_dim: usize, len: usize) -> Self {
        Self::from_flat(fiber_dim, vec![Complex64::ZERO; fiber_dim * len.max(1)], 0.0)
    }

    /// `z^degree * e`.
    pub fn monomial(degree: usize, e: &[Complex64]) -> Self {
        let d = e.len();
        let mut coeffs = vec![Complex64::ZERO; d * (degree + 1)];
        coeffs[degree * d..].copy_from_slice(e);
        Self::from_flat(d, coeffs, 0.0)
    }

    /// Geometric series `sum_{n < len} a^n z^n * e`, without tail bound.
    pub fn geometric(a: Complex64, len: usize, e: &[Complex64]) -> Self {
        let d = e.len();
        let mut coeffs = Vec::with_capacity(d * len);
        let mut p = Complex64::ONE;
        for _ in 0..len {
            coeffs.extend(e.iter().map(|x| x * p));
            p *= a;
        }
        Self::from_flat(d, coeffs, 0.0)
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    /// Number of stored degrees (`N + 1`).
    pub fn len(&self) -> usize {
        self.coeffs.len() / self.fiber_dim
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn with_tail_bound(mut self, tail_bound: f64) -> Self {
        self.tail_bound = tail_bound;
        self
    }

    /// Fiber vector of degree `n` (empty past the stored range).
    pub fn coeff(&self, n: usize) -> &[Complex64] {
        let d = self.fiber_dim;
        self.coeffs.get(n * d..(n + 1) * d).unwrap_or(&[])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Highest degree with a nonzero coefficient, `None` for the zero function.
    pub fn degree(&self) -> Option<usize> {
        (0..self.len())
            .rev()
            .find(|&n| self.coeff(n).iter().any(|c| *c != Complex64::ZERO))
    }

    /// True when every coefficient of degree at least one vanishes and no tail
    /// is carried.
    pub fn is_constant(&self) -> bool {
        self.tail_bound == 0.0 && self.coeffs[self.fiber_dim..].iter().all(|c| *c == Complex64::ZERO)
    }

    /// Horner evaluation of the stored polynomial.
    pub fn evaluate_stored(&self, z: Complex64) -> Vec<Complex64> {
        let d = self.fiber_dim;
        let mut acc = vec![Complex64::ZERO; d];
        for n in (0..self.len()).rev() {
            for (a, c) in acc.iter_mut().zip(self.coeff(n)) {
                *a = *a * z + c;
            }
        }
        acc
    }

    /// `c * self`; the tail scales by `|c|`.
    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            fiber_dim: self.fiber_dim,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            tail_bound: self.tail_bound * c.norm(),
        }
    }

    /// `self + c * other`, padding to the longer length. Tails add by the
    /// triangle inequality.
    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Result<Self> {
        if self.fiber_dim != other.fiber_dim {
            return Err(Error::FiberMismatch {
                expected: self.fiber_dim,
                found: other.fiber_dim,
            });
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or_default();
                let b = other.coeffs.get(i).copied().unwrap_or_default();
                a + c * b
            })
            .collect();
        Ok(Self {
            fiber_dim: self.fiber_dim,
            coeffs,
            tail_bound: self.tail_bound + c.norm() * other.tail_bound,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-Complex64::ONE, other)
    }

    /// Kronecker product with a fiber vector: scalar `f` becomes `f * e`.
    pub fn tensor(&self, e: &[Complex64]) -> Result<Self> {
        if self.fiber_dim != 1 {
            return Err(Error::FiberMismatch {
                expected: 1,
                found: self.fiber_dim,
            });
        }
        let e_norm = e.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let coeffs = self
            .coeffs
            .iter()
            .flat_map(|a| e.iter().map(move |x| a * x))
            .collect();
        Ok(Self::from_flat(e.len(), coeffs, self.tail_bound * e_norm))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionDescriptor {
    fiber_dim: usize,
    coeffs: CoeffList,
    #[serde(default)]
    tail_bound: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffList {
    Scalar(Vec<[f64; 2]>),
    Vector(Vec<Vec<[f64; 2]>>),
}

impl TryFrom<FunctionDescriptor> for CoeffFunction {
    type Error = Error;

    fn try_from(desc: FunctionDescriptor) -> Result<Self> {
        let to_c = |p: [f64; 2]| Complex64::new(p[0], p[1]);
        let per_degree: Vec<Vec<Complex64>> = match desc.coeffs {
            CoeffList::Scalar(v) => v.into_iter().map(|p| vec![to_c(p)]).collect(),
            CoeffList::Vector(v) => v
                .into_iter()
                .map(|c| c.into_iter().map(to_c).collect())
                .collect(),
        };
        if per_degree.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("coefficients must be finite".into()));
        }
        CoeffFunction::new(desc.fiber_dim, per_degree, desc.tail_bound)
    }
}

impl From<CoeffFunction> for FunctionDescriptor {
    fn from(f: CoeffFunction) -> Self {
        let pair = |c: &Complex64| [c.re, c.im];
        let coeffs = if f.fiber_dim == 1 {
            CoeffList::Scalar(f.coeffs.iter().map(pair).collect())
        } else {
            CoeffList::Vector(
                f.coeffs
                    .chunks(f.fiber_dim)
                    .map(|c| c.iter().map(pair).collect())
                    .collect(),
            )
        };
        FunctionDescriptor {
            fiber_dim: f.fiber_dim,
            coeffs,
            tail_bound: f.tail_bound,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn horner_evaluation() {
        let z2 = CoeffFunction::monomial(2, &[Complex64::ONE]);
        assert_eq!(z2.evaluate_stored(c(0.0, 2.0)), vec![c(-4.0, 0.0)]);
        let one = CoeffFunction::constant(&[Complex64::ONE]);
        assert_eq!(one.evaluate_stored(c(100.0, 0.0)), vec![Complex64::ONE]);
    }

    #[test]
    fn degree_and_constness() {
        let f = CoeffFunction::scalar(vec![c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(f.degree(), Some(2));
        assert!(!f.is_constant());
        assert!(CoeffFunction::zero(2, 5).degree().is_none());
        assert!(CoeffFunction::constant(&[c(1.0, 0.0), c(0.0, 1.0)]).is_constant());
    }

    #[test]
    fn scalar_json_uses_flat_pairs() {
        let f = CoeffFunction::scalar(vec![c(1.0, 0.0), c(0.5, -0.25)]).with_tail_bound(1e-3);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"fiber_dim":1,"coeffs":[[1.0,0.0],[0.5,-0.25]],"tail_bound":0.001}"#);
        let back: CoeffFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn vector_json_nests_fibers() {
        let f = CoeffFunction::new(2, vec![vec![c(1.0, 0.0), c(0.0, 0.0)]], 0.0).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"fiber_dim":2,"coeffs":[[[1.0,0.0],[0.0,0.0]]],"tail_bound":0.0}"#);
        let back: CoeffFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn malformed_descriptors_are_rejected() {
        for bad in [
            r#"{"fiber_dim":2,"coeffs":[[[1.0,0.0]]]}"#,
            r#"{"fiber_dim":1,"coeffs":[]}"#,
            r#"{"fiber_dim":0,"coeffs":[[1.0,0.0]]}"#,
            r#"{"fiber_dim":1,"coeffs":[[1.0,0.0]],"tail_bound":-1.0}"#,
            r#"{"fiber_dim":1,"coeffs":[[1.0]]}"#,
        ] {
            assert!(serde_json::from_str::<CoeffFunction>(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn tensor_places_scalar_along_fiber() {
        let f = CoeffFunction::geometric(c(0.5, 0.0), 3, &[Complex64::ONE]);
        let g = f.tensor(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(g.fiber_dim(), 2);
        assert_eq!(g.coeff(2), &[c(0.25, 0.0), c(0.0, 0.0)]);
    }
}
