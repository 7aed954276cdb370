//! The resolvent `R_lambda = (I - lambda L)^{-1}`, the decomposition
//! `f = (M_z - lambda) g + h`, the kernel component `c_lambda(f)` and the
//! continuation `lambda -> c_lambda(f)(lambda)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::coeffspace::{fiber_norm_sqr, CoeffFunction, SpaceModel, WeightKind};
use crate::error::{Error, Result};
use crate::subspaces::InvariantSubspace;

/// Consecutive small terms required before the Neumann series stops.
const NEUMANN_SMALL_RUN: usize = 3;
/// Consecutive non-decreasing terms that declare divergence.
const NEUMANN_DIVERGENT_RUN: usize = 20;

/// Value of the continued function at `lambda` together with the kernel
/// component it was read from.
#[derive(Clone, Debug)]
pub struct ContinuationResult {
    pub lambda: Complex64,
    pub value: Vec<Complex64>,
    /// `c_lambda(f)`, a constant function.
    pub kernel_component: CoeffFunction,
    /// `||(M_z - lambda) R_lambda f - M_z f + lambda c_lambda(f)||`.
    pub residual: f64,
    /// Tolerance budget the residual was checked against.
    pub budget: f64,
    /// Whether `1/lambda` was certified outside the spectrum of the
    /// restriction used.
    pub in_paper_domain: bool,
}

impl Serialize for ContinuationResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ContinuationResult", 4)?;
        st.serialize_field("lambda", &self.lambda)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("in_paper_domain", &self.in_paper_domain)?;
        st.end()
    }
}

/// Output of [`decompose`].
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub g: CoeffFunction,
    /// Element of the kernel of `L` (a constant).
    pub h: CoeffFunction,
    /// `||f - (M_z - lambda) g - h||`.
    pub residual: f64,
}

/// Output of [`kernel_component_c`].
#[derive(Clone, Debug)]
pub struct KernelComponent {
    pub c: CoeffFunction,
    /// `R_lambda f`.
    pub resolvent: CoeffFunction,
    pub residual: f64,
    pub budget: f64,
    pub certified: bool,
}

/// Sums `sum_k lambda^k L^k f` until three consecutive terms fall below
/// `tol * ||f||`. Twenty consecutive non-decreasing term norms are reported
/// as divergence.
pub fn neumann_series(model: &SpaceModel, f: &CoeffFunction, lambda: Complex64) -> Result<CoeffFunction> {
    let f = model.conform(f)?;
    let d = model.fiber_dim();
    let threshold = model.tol() * model.norm(&f);
    let mut sum = f.coeffs().to_vec();
    let mut term = f.coeffs().to_vec();
    let mut prev_norm = model.norm(&f);
    let (mut small_run, mut growing_run) = (usize::from(prev_norm <= threshold), 0usize);
    let mut k = 0usize;
    while small_run < NEUMANN_SMALL_RUN {
        k += 1;
        // term <- lambda L term
        term.rotate_left(d);
        let len = term.len();
        term[len - d..].iter_mut().for_each(|c| *c = Complex64::ZERO);
        term.iter_mut().for_each(|c| *c *= lambda);
        sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);

        let norm = weighted_norm(model, &term);
        small_run = if norm <= threshold { small_run + 1 } else { 0 };
        growing_run = if norm >= prev_norm && norm > threshold { growing_run + 1 } else { 0 };
        if growing_run >= NEUMANN_DIVERGENT_RUN {
            return Err(Error::OutsideDomain {
                lambda,
                reason: format!("Neumann series terms grew for {NEUMANN_DIVERGENT_RUN} consecutive steps (k = {k})"),
            });
        }
        prev_norm = norm;
    }
    let tail = if f.tail_bound() == 0.0 {
        0.0
    } else {
        f.tail_bound() * model.weights().neumann_norm_bound(lambda.norm(), 0)
    };
    Ok(CoeffFunction::from_flat(d, sum, tail))
}

fn weighted_norm(model: &SpaceModel, coeffs: &[Complex64]) -> f64 {
    let d = model.fiber_dim();
    coeffs
        .chunks(d)
        .enumerate()
        .map(|(n, c)| {
            let b = model.weights().beta(n);
            b * b * fiber_norm_sqr(c)
        })
        .sum::<f64>()
        .sqrt()
}

fn full_space_certified(model: &SpaceModel, lambda: Complex64) -> Result<bool> {
    let r = model.weights().left_spectral_radius();
    if lambda.norm() * r >= 1.0 {
        return Err(Error::OutsideDomain {
            lambda,
            reason: format!("|lambda| = {} is not below 1/r(L) = {}", lambda.norm(), 1.0 / r),
        });
    }
    // custom weights only carry an estimate of r(L)
    Ok(model.kind() != WeightKind::Custom)
}

/// `g` with `(I - lambda L) g = f`. Without a subspace the Neumann series is
/// used, which requires `|lambda| < 1 / r(L)`; with a subspace the restriction
/// system is solved in its orthonormal basis.
pub fn resolvent_r(
    model: &SpaceModel,
    f: &CoeffFunction,
    lambda: Complex64,
    subspace: Option<&InvariantSubspace>,
) -> Result<CoeffFunction> {
    match subspace {
        None => {
            full_space_certified(model, lambda)?;
            neumann_series(model, f, lambda)
        }
        Some(sub) => Ok(sub.resolvent(model, f, lambda)?.g),
    }
}

/// `f = (M_z - lambda) g + h` with `g = R_lambda L f` and `h` constant.
pub fn decompose(model: &SpaceModel, f: &CoeffFunction, lambda: Complex64) -> Result<Decomposition> {
    let f = model.conform(f)?;
    let g = resolvent_r(model, &model.apply_l(&f)?, lambda, None)?;
    let shifted = model.apply_mz(&g)?.add_scaled(-lambda, &g)?;
    let h_raw = f.sub(&shifted)?;
    let d = model.fiber_dim();
    let h = CoeffFunction::constant(h_raw.coeff(0)).with_tail_bound(h_raw.tail_bound());
    let mut off_kernel = h_raw.coeffs().to_vec();
    off_kernel[..d].iter_mut().for_each(|c| *c = Complex64::ZERO);
    let residual = weighted_norm(model, &off_kernel);
    let budget = 10.0 * model.tol() * model.norm(&f);
    if residual > budget {
        return Err(Error::ToleranceExceeded {
            what: "decomposition identity",
            residual,
            budget,
        });
    }
    Ok(Decomposition { g, h, residual })
}

/// `c_lambda(f) = (I - M_z L) R_lambda f`, checked against
/// `(M_z - lambda) R_lambda f = M_z f - lambda c_lambda(f)`.
pub fn kernel_component_c(
    model: &SpaceModel,
    f: &CoeffFunction,
    lambda: Complex64,
    subspace: Option<&InvariantSubspace>,
) -> Result<KernelComponent> {
    if lambda == Complex64::ZERO {
        return Err(Error::DegenerateParameter("the kernel component c_lambda"));
    }
    let f = model.conform(f)?;
    let (g, certified, extra_budget) = match subspace {
        None => {
            let certified = full_space_certified(model, lambda)?;
            (neumann_series(model, &f, lambda)?, certified, 0.0)
        }
        Some(sub) => {
            let solve = sub.resolvent(model, &f, lambda)?;
            (solve.g, solve.certified, solve.error_estimate)
        }
    };
    let mlg = model.apply_mz(&model.apply_l(&g)?)?;
    let c_full = g.sub(&mlg)?;
    let d = model.fiber_dim();
    debug_assert!(c_full.coeffs()[d..].iter().all(|c| *c == Complex64::ZERO));
    let c = CoeffFunction::constant(c_full.coeff(0)).with_tail_bound(g.tail_bound());

    let lhs = model.apply_mz(&g)?.add_scaled(-lambda, &g)?;
    let rhs = model.apply_mz(&f)?.add_scaled(-lambda, &c)?;
    let residual = model.norm(&lhs.sub(&rhs)?);
    let budget = 10.0 * model.tol() * model.norm(&f) + extra_budget;
    if residual > budget {
        return Err(Error::ToleranceExceeded {
            what: "kernel component identity",
            residual,
            budget,
        });
    }
    Ok(KernelComponent {
        c,
        resolvent: g,
        residual,
        budget,
        certified,
    })
}

/// Continued value `c_lambda(f)(lambda)`. Inside the evaluation disc the value
/// is checked against `f(lambda)`.
pub fn continue_f(
    model: &SpaceModel,
    f: &CoeffFunction,
    lambda: Complex64,
    subspace: Option<&InvariantSubspace>,
) -> Result<ContinuationResult> {
    if lambda == Complex64::ZERO {
        return Err(Error::DegenerateParameter("the continuation"));
    }
    let kc = kernel_component_c(model, f, lambda, subspace)?;
    let at = model.evaluate_kernel_element(&kc.c, lambda)?;

    if lambda.norm() < model.evaluation_radius() {
        let direct = model.evaluate(&model.conform(f)?, lambda)?;
        let r = lambda.norm();
        let point_norm = model
            .weights()
            .point_evaluation_bound(r)
            .hypot(model.weights().evaluation_tail(r, model.trunc_len()));
        let combined = kc.budget * point_norm
            + 10.0 * model.tol() * model.norm(f) * point_norm
            + direct.error_bound
            + at.error_bound;
        let gap = at
            .value
            .iter()
            .zip(&direct.value)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if gap > combined {
            return Err(Error::ToleranceExceeded {
                what: "interior agreement with f(lambda)",
                residual: gap,
                budget: combined,
            });
        }
    }
    Ok(ContinuationResult {
        lambda,
        value: at.value,
        kernel_component: kc.c,
        residual: kc.residual,
        budget: kc.budget,
        in_paper_domain: kc.certified,
    })
}

/// `(M_z - lambda)^{-1} e = -sum_n lambda^{-n-1} z^n e`, an eigenvector of `L`
/// for the eigenvalue `1/lambda`. The dropped tail is recorded.
pub fn eigenvector_at(model: &SpaceModel, lambda: Complex64, e: &[Complex64]) -> Result<CoeffFunction> {
    let radius = model.evaluation_radius();
    if lambda.norm() <= radius {
        return Err(Error::OutsideDomain {
            lambda,
            reason: format!("|lambda| must exceed {radius}, the spectral radius of M_z"),
        });
    }
    if e.len() != model.fiber_dim() {
        return Err(Error::FiberMismatch {
            expected: model.fiber_dim(),
            found: e.len(),
        });
    }
    let e_norm = fiber_norm_sqr(e).sqrt();
    if e_norm == 0.0 {
        return Err(Error::InvalidParameter("kernel vector must be nonzero".into()));
    }
    let inv = lambda.inv();
    let v = CoeffFunction::geometric(inv, model.trunc_len() + 1, e).scale(-inv);
    let tail = e_norm * inv.norm() * model.weights().weighted_geometric_tail(inv.norm(), model.trunc_len());
    if !tail.is_finite() {
        return Err(Error::OutsideDomain {
            lambda,
            reason: "eigenvector tail does not converge for these weights".into(),
        });
    }
    Ok(v.with_tail_bound(tail))
}

/// Laurent coefficients `P_E T^n h`, `n = 1..=terms`, with successive norm
/// ratios as a decay estimate.
#[derive(Clone, Debug)]
pub struct LaurentSeries {
    pub coeffs: Vec<DVector<Complex64>>,
    /// `||P_E T^{n+1} h|| / ||P_E T^n h||`; `None` where the denominator vanishes.
    pub decay_ratios: Vec<Option<f64>>,
}

impl LaurentSeries {
    /// Last available decay ratio, an estimate of the radius outside which
    /// the series converges absolutely.
    pub fn decay_estimate(&self) -> Option<f64> {
        self.decay_ratios.iter().rev().find_map(|r| *r)
    }
}

/// Coefficients of `U_h(z) = sum_{n >= 1} (P_E T^n h) z^{-n}`, where `P_E`
/// keeps the first `e_dim` coordinates.
pub fn exterior_series(
    t: &DMatrix<Complex64>,
    h: &DVector<Complex64>,
    e_dim: usize,
    terms: usize,
) -> Result<LaurentSeries> {
    let m = t.nrows();
    if !t.is_square() {
        return Err(Error::DimensionMismatch(format!("T is {}x{}, not square", m, t.ncols())));
    }
    if h.len() != m {
        return Err(Error::DimensionMismatch(format!("h has length {}, T is {m}x{m}", h.len())));
    }
    if e_dim == 0 || e_dim > m {
        return Err(Error::DimensionMismatch(format!("E dimension {e_dim} must lie in 1..={m}")));
    }
    if terms == 0 {
        return Err(Error::InvalidParameter("at least one term is required".into()));
    }
    let mut x = h.clone();
    let mut coeffs = Vec::with_capacity(terms);
    for _ in 0..terms {
        x = t * x;
        coeffs.push(x.rows(0, e_dim).into_owned());
    }
    let decay_ratios = coeffs
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].norm(), w[1].norm());
            (a > 0.0).then(|| b / a)
        })
        .collect();
    Ok(LaurentSeries { coeffs, decay_ratios })
}
