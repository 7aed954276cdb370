use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::function::CoeffFunction;
use super::weights::{WeightKind, WeightSequence};
use crate::error::{Error, Result};

/// Smallest admissible truncation degree.
pub const MIN_TRUNCATION: usize = 8;

/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A weighted coefficient space of `C^d`-valued functions, truncated at degree
/// `N`, on which `M_z` and its canonical left inverse act.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDescriptor", into = "SpaceDescriptor")]
pub struct SpaceModel {
    weights: WeightSequence,
    fiber_dim: usize,
    trunc_len: usize,
    tol: f64,
}

/// Point value together with a bound on the error caused by the tail.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Vec<Complex64>,
    pub error_bound: f64,
}

/// Builds a preset space. `Custom` weights go through [`make_custom_space`].
pub fn make_space(kind: WeightKind, d: usize, n: usize, tol: f64) -> Result<SpaceModel> {
    check_shape(d, n, tol)?;
    SpaceModel::assemble(WeightSequence::preset(kind, n)?, d, n, tol)
}

/// Builds a space from an explicit weight list covering at least degrees
/// `0..=n`.
pub fn make_custom_space(beta: Vec<f64>, d: usize, n: usize, tol: f64) -> Result<SpaceModel> {
    check_shape(d, n, tol)?;
    if beta.len() < n + 1 {
        return Err(Error::InvalidWeights(format!(
            "custom weights cover degrees 0..{}, need 0..={n}",
            beta.len()
        )));
    }
    let mut beta = beta;
    beta.truncate(n + 1);
    SpaceModel::assemble(WeightSequence::custom(beta)?, d, n, tol)
}

fn check_shape(d: usize, n: usize, tol: f64) -> Result<()> {
    if n < MIN_TRUNCATION {
        return Err(Error::TruncationTooSmall {
            given: n,
            min: MIN_TRUNCATION,
        });
    }
    if d == 0 {
        return Err(Error::InvalidParameter("fiber dimension must be positive".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, found {tol}")));
    }
    Ok(())
}

impl SpaceModel {
    fn assemble(weights: WeightSequence, fiber_dim: usize, trunc_len: usize, tol: f64) -> Result<Self> {
        Ok(Self {
            weights,
            fiber_dim,
            trunc_len,
            tol,
        })
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    pub fn kind(&self) -> WeightKind {
        self.weights.kind()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    /// Maximum stored degree `N`.
    pub fn trunc_len(&self) -> usize {
        self.trunc_len
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Same weights and fiber, different truncation degree or tolerance.
    pub fn with_truncation(&self, n: usize) -> Result<Self> {
        match self.kind() {
            WeightKind::Custom => {
                let mut beta = self.weights.values().to_vec();
                while beta.len() < n + 1 {
                    beta.push(self.weights.beta(beta.len()));
                }
                make_custom_space(beta, self.fiber_dim, n, self.tol)
            }
            kind => make_space(kind, self.fiber_dim, n, self.tol),
        }
    }

    pub fn with_tol(&self, tol: f64) -> Result<Self> {
        check_shape(self.fiber_dim, self.trunc_len, tol)?;
        Ok(Self { tol, ..self.clone() })
    }

    /// Number of stored coordinates, `(N + 1) d`.
    pub fn dim(&self) -> usize {
        (self.trunc_len + 1) * self.fiber_dim
    }

    /// Radius of the disc of convergence shared by all functions of the space.
    pub fn evaluation_radius(&self) -> f64 {
        self.weights.radius()
    }

    /// Brings `f` to exactly `N + 1` stored degrees. Missing degrees are zero;
    /// degrees beyond `N` are dropped and their weighted norm is folded into
    /// the tail bound.
    pub fn conform(&self, f: &CoeffFunction) -> Result<CoeffFunction> {
        let d = self.fiber_dim;
        if f.fiber_dim() != d {
            return Err(Error::FiberMismatch {
                expected: d,
                found: f.fiber_dim(),
            });
        }
        let len = self.trunc_len + 1;
        let mut coeffs = f.coeffs().to_vec();
        let mut tail = f.tail_bound();
        if coeffs.len() > len * d {
            let dropped: f64 = (len..f.len())
                .map(|n| {
                    let b = self.weights.beta(n);
                    b * b * fiber_norm_sqr(f.coeff(n))
                })
                .sum();
            tail += dropped.sqrt();
            coeffs.truncate(len * d);
        } else {
            coeffs.resize(len * d, Complex64::ZERO);
        }
        Ok(CoeffFunction::from_flat(d, coeffs, tail))
    }

    /// Weighted norm of the stored coefficients.
    pub fn norm(&self, f: &CoeffFunction) -> f64 {
        (0..f.len())
            .map(|n| {
                let b = self.weights.beta(n);
                b * b * fiber_norm_sqr(f.coeff(n))
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Weighted inner product `<f, g>`, conjugate-linear in `f`.
    pub fn inner(&self, f: &CoeffFunction, g: &CoeffFunction) -> Complex64 {
        (0..f.len().min(g.len()))
            .map(|n| {
                let b = self.weights.beta(n);
                let s: Complex64 = f.coeff(n).iter().zip(g.coeff(n)).map(|(a, c)| a.conj() * c).sum();
                s * (b * b)
            })
            .sum()
    }

    /// Coordinates in the orthonormal basis `z^n e_j / beta_n`.
    pub fn coords(&self, f: &CoeffFunction) -> Result<Vec<Complex64>> {
        let f = self.conform(f)?;
        let d = self.fiber_dim;
        let mut x = f.coeffs().to_vec();
        for (n, chunk) in x.chunks_mut(d).enumerate() {
            let b = self.weights.beta(n);
            chunk.iter_mut().for_each(|c| *c *= b);
        }
        Ok(x)
    }

    /// Inverse of [`coords`](Self::coords).
    pub fn from_coords(&self, x: &[Complex64], tail_bound: f64) -> CoeffFunction {
        debug_assert_eq!(x.len(), self.dim());
        let d = self.fiber_dim;
        let mut coeffs = x.to_vec();
        for (n, chunk) in coeffs.chunks_mut(d).enumerate() {
            let b = self.weights.beta(n);
            chunk.iter_mut().for_each(|c| *c /= b);
        }
        CoeffFunction::from_flat(d, coeffs, tail_bound)
    }

    /// Constant functions `e_1, .., e_d`: a basis of the kernel of `L`.
    pub fn kernel_basis(&self) -> Vec<CoeffFunction> {
        (0..self.fiber_dim)
            .map(|j| CoeffFunction::constant(&unit_vector(self.fiber_dim, j)))
            .collect()
    }

    /// Truncated Szego-type kernel `e / (1 - a z)`, with the dropped tail
    /// recorded.
    pub fn szego_kernel(&self, a: Complex64, e: &[Complex64]) -> Result<CoeffFunction> {
        if e.len() != self.fiber_dim {
            return Err(Error::FiberMismatch {
                expected: self.fiber_dim,
                found: e.len(),
            });
        }
        let tail = self.weights.weighted_geometric_tail(a.norm(), self.trunc_len) * fiber_norm_sqr(e).sqrt();
        if !tail.is_finite() {
            return Err(Error::Domain {
                z: a,
                radius: 1.0 / self.weights.radius(),
            });
        }
        Ok(CoeffFunction::geometric(a, self.trunc_len + 1, e).with_tail_bound(tail))
    }

    /// Scalar Szego kernel placed along the first fiber coordinate.
    pub fn szego(&self, a: f64) -> Result<CoeffFunction> {
        self.szego_kernel(Complex64::new(a, 0.0), &unit_vector(self.fiber_dim, 0))
    }

    /// Multiplication by `z`. A nonzero top coefficient is pushed past the
    /// truncation and accounted for in the tail bound.
    pub fn apply_mz(&self, f: &CoeffFunction) -> Result<CoeffFunction> {
        let f = self.conform(f)?;
        let d = self.fiber_dim;
        let n = self.trunc_len;
        let mut coeffs = vec![Complex64::ZERO; d];
        coeffs.extend_from_slice(&f.coeffs()[..n * d]);
        let dropped = self.weights.beta(n + 1) * fiber_norm_sqr(f.coeff(n)).sqrt();
        let tail = f.tail_bound() * self.weights.mz_norm() + dropped;
        Ok(CoeffFunction::from_flat(d, coeffs, tail))
    }

    /// Canonical left inverse: the coefficient down-shift, i.e. the difference
    /// quotient at 0.
    pub fn apply_l(&self, f: &CoeffFunction) -> Result<CoeffFunction> {
        let f = self.conform(f)?;
        let d = self.fiber_dim;
        let mut coeffs = f.coeffs()[d..].to_vec();
        coeffs.extend(std::iter::repeat_n(Complex64::ZERO, d));
        let tail = f.tail_bound() * self.weights.l_norm();
        Ok(CoeffFunction::from_flat(d, coeffs, tail))
    }

    /// `(f(z) - f(lambda)) / (z - lambda)`, with coefficients
    /// `sum_{k > n} a_k lambda^{k - n - 1}`.
    pub fn difference_quotient(&self, f: &CoeffFunction, lambda: Complex64) -> Result<CoeffFunction> {
        let radius = self.evaluation_radius();
        if lambda.norm() >= radius {
            return Err(Error::Domain { z: lambda, radius });
        }
        let f = self.conform(f)?;
        let d = self.fiber_dim;
        let n = self.trunc_len;
        let mut q = vec![Complex64::ZERO; (n + 1) * d];
        for k in (0..n).rev() {
            for j in 0..d {
                q[k * d + j] = f.coeffs()[(k + 1) * d + j] + lambda * q[(k + 1) * d + j];
            }
        }
        let tail = if f.tail_bound() == 0.0 {
            0.0
        } else {
            f.tail_bound() * self.weights.neumann_norm_bound(lambda.norm(), 1)
        };
        Ok(CoeffFunction::from_flat(d, q, tail))
    }

    /// Point evaluation. Polynomials without tail evaluate anywhere; otherwise
    /// `z` must lie strictly inside the evaluation radius.
    pub fn evaluate(&self, f: &CoeffFunction, z: Complex64) -> Result<Evaluation> {
        if f.fiber_dim() != self.fiber_dim {
            return Err(Error::FiberMismatch {
                expected: self.fiber_dim,
                found: f.fiber_dim(),
            });
        }
        let value = f.evaluate_stored(z);
        if f.tail_bound() == 0.0 {
            return Ok(Evaluation {
                value,
                error_bound: 0.0,
            });
        }
        let radius = self.evaluation_radius();
        let r = z.norm();
        if r >= radius {
            return Err(Error::Domain { z, radius });
        }
        let stored = self.weights.point_evaluation_bound(r);
        let beyond = self.weights.evaluation_tail(r, self.trunc_len);
        Ok(Evaluation {
            value,
            error_bound: f.tail_bound() * stored.hypot(beyond),
        })
    }

    /// Evaluation override for kernel elements of `L` (constants), which are
    /// entire: valid at every `z`.
    pub fn evaluate_kernel_element(&self, f: &CoeffFunction, z: Complex64) -> Result<Evaluation> {
        let d = f.fiber_dim();
        if f.coeffs()[d..].iter().any(|c| *c != Complex64::ZERO) {
            return Err(Error::InvalidParameter(
                "evaluation override applies only to constant functions".into(),
            ));
        }
        Ok(Evaluation {
            value: f.evaluate_stored(z),
            error_bound: f.tail_bound() / self.weights.beta(0),
        })
    }

    /// Dimension of `{f : L f = 0, deg f <= N}` read off the truncated matrix
    /// of `L`: the number of singular values below `tol * ||L||`.
    pub fn kernel_dimension(&self) -> usize {
        let w = self.weights.values();
        // L is a pure superdiagonal in the orthonormal basis; its singular
        // values are the moduli of the superdiagonal plus one zero per fiber.
        let off: Vec<f64> = w.windows(2).map(|p| p[0] / p[1]).collect();
        let diag = vec![0.0; off.len() + 1];
        let scale = off.iter().fold(0.0_f64, |m, v| m.max(*v));
        let per_fiber = crate::linalg::count_singular_values_below(
            &crate::linalg::Bidiagonal::upper(diag, off),
            self.tol * scale,
        );
        per_fiber * self.fiber_dim
    }
}

pub(crate) fn fiber_norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

pub(crate) fn unit_vector(d: usize, j: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::ZERO; d];
    e[j] = Complex64::ONE;
    e
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceDescriptor {
    kind: WeightKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<Vec<f64>>,
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(default = "default_tol")]
    tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl TryFrom<SpaceDescriptor> for SpaceModel {
    type Error = Error;

    fn try_from(desc: SpaceDescriptor) -> Result<Self> {
        match (desc.kind, desc.beta) {
            (WeightKind::Custom, Some(beta)) => make_custom_space(beta, desc.d, desc.n, desc.tol),
            (WeightKind::Custom, None) => Err(Error::InvalidWeights(
                "custom weights require an explicit beta list".into(),
            )),
            (_, Some(_)) => Err(Error::InvalidWeights(
                "beta may only be given for custom weights".into(),
            )),
            (kind, None) => make_space(kind, desc.d, desc.n, desc.tol),
        }
    }
}

impl From<SpaceModel> for SpaceDescriptor {
    fn from(m: SpaceModel) -> Self {
        let beta = (m.kind() == WeightKind::Custom).then(|| m.weights.values().to_vec());
        SpaceDescriptor {
            kind: m.kind(),
            beta,
            d: m.fiber_dim,
            n: m.trunc_len,
            tol: m.tol,
        }
    }
}
