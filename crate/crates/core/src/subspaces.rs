//! Finite-dimensional `L`-invariant subspaces and truncated `L`-orbits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffspace::{CoeffFunction, SpaceModel};
use crate::error::{Error, Result};
use crate::linalg;
use crate::resolvent::eigenvector_at;

/// Default relative residual for membership and invariance verdicts.
pub const DEFAULT_SUBSPACE_TOL: f64 = 1e-6;
/// Generator sets whose Gram matrix is worse conditioned than this are refused.
pub const MAX_GRAM_CONDITION: f64 = 1e12;
/// Relative norm below which an orbit vector is treated as already spanned.
const ORBIT_DEFLATION: f64 = 1e-8;

/// How generators are turned into a subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildMode {
    /// The span of the generators, which must already be invariant.
    ExactSpan,
    /// The span of `L^k g` for `k < K`; an approximation of the cyclic
    /// invariant subspace whose closure residual is reported, not enforced.
    OrbitClosure(usize),
}

/// A subspace `M` with an orthonormal basis `Q` (in the coordinates
/// `z^n e_j / beta_n`) and the compression `A = Q^H L Q` of `L` to it.
#[derive(Clone, Debug)]
pub struct InvariantSubspace {
    generators: Vec<CoeffFunction>,
    mode: BuildMode,
    basis: Vec<CoeffFunction>,
    gram: DMatrix<Complex64>,
    condition: f64,
    q: DMatrix<Complex64>,
    restriction: DMatrix<Complex64>,
    closure_residual: f64,
    tolerance: f64,
    fiber_dim: usize,
    trunc_len: usize,
}

/// Output of [`InvariantSubspace::resolvent`].
#[derive(Clone, Debug)]
pub struct SubspaceSolve {
    /// `g` with `(I - lambda L) g = f` up to the invariance defect.
    pub g: CoeffFunction,
    /// `sigma_min(I - lambda A)`.
    pub sigma_min: f64,
    /// A priori bound for `||M_z((I - lambda L) g - f)||`.
    pub error_estimate: f64,
    /// True when the closure residual is within tolerance.
    pub certified: bool,
}

/// Verdict of [`membership_test`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub is_member: bool,
    pub residual: f64,
    pub threshold: f64,
}

/// Both sides of the point-spectrum characterization at one `lambda`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSpectrumVerdict {
    /// Some `(M_z - lambda)^{-1} h`, `h` in the kernel span, lies in `M`.
    pub by_membership: bool,
    /// Smallest relative distance from that eigenvector family to `M`.
    pub membership_residual: f64,
    /// `1/lambda` is an eigenvalue of the restriction.
    pub by_eigenvalue: bool,
    /// Distance from `1/lambda` to the restriction spectrum.
    pub eigenvalue_distance: f64,
    pub threshold: f64,
}

impl PointSpectrumVerdict {
    pub fn agree(&self) -> bool {
        self.by_membership == self.by_eigenvalue
    }

    /// The membership answer, which the eigenvalue answer cross-checks.
    pub fn holds(&self) -> bool {
        self.by_membership
    }
}

/// One row of [`arr_disc_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArrEntry {
    pub a: Complex64,
    pub in_spectrum: bool,
    pub is_member: bool,
    pub agree: bool,
}

/// JSON form `{generators, mode, tolerance}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceDescriptor {
    pub generators: Vec<CoeffFunction>,
    pub mode: BuildMode,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_SUBSPACE_TOL
}

impl SubspaceDescriptor {
    pub fn build(&self, model: &SpaceModel) -> Result<InvariantSubspace> {
        build_subspace_with_tolerance(model, &self.generators, self.mode, self.tolerance)
    }
}

/// `L` in orthonormal coordinates: `(L x)_n = (beta_n / beta_{n+1}) x_{n+1}`.
pub(crate) fn l_coords(model: &SpaceModel, x: &[Complex64]) -> Vec<Complex64> {
    let d = model.fiber_dim();
    let w = model.weights();
    let mut y = vec![Complex64::ZERO; x.len()];
    for n in 0..model.trunc_len() {
        let r = w.beta(n) / w.beta(n + 1);
        for j in 0..d {
            y[n * d + j] = x[(n + 1) * d + j] * r;
        }
    }
    y
}

fn l_matrix(model: &SpaceModel, q: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(q.nrows(), q.ncols());
    for (j, col) in q.column_iter().enumerate() {
        let y = l_coords(model, col.as_slice());
        out.set_column(j, &DVector::from_vec(y));
    }
    out
}

pub fn build_subspace(model: &SpaceModel, generators: &[CoeffFunction], mode: BuildMode) -> Result<InvariantSubspace> {
    build_subspace_with_tolerance(model, generators, mode, DEFAULT_SUBSPACE_TOL)
}

pub fn build_subspace_with_tolerance(
    model: &SpaceModel,
    generators: &[CoeffFunction],
    mode: BuildMode,
    tolerance: f64,
) -> Result<InvariantSubspace> {
    if generators.is_empty() {
        return Err(Error::InvalidParameter("at least one generator is required".into()));
    }
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidParameter(format!("subspace tolerance {tolerance} must be positive")));
    }
    let generators = generators.iter().map(|g| model.conform(g)).collect::<Result<Vec<_>>>()?;
    let coords = generators.iter().map(|g| model.coords(g)).collect::<Result<Vec<_>>>()?;
    if let Some(i) = coords.iter().position(|x| linalg::vec_norm(x) == 0.0) {
        return Err(Error::InvalidParameter(format!("generator {i} is zero")));
    }

    let (basis_coords, q) = match mode {
        BuildMode::ExactSpan => {
            let x = DMatrix::from_fn(model.dim(), coords.len(), |r, c| coords[c][r]);
            let q = orthonormalize(&x)?;
            (coords, q)
        }
        BuildMode::OrbitClosure(k) => {
            if k == 0 {
                return Err(Error::InvalidParameter("orbit length K must be at least 1".into()));
            }
            orbit_basis(model, &coords, k)
        }
    };

    let basis_mat = DMatrix::from_fn(model.dim(), basis_coords.len(), |r, c| basis_coords[c][r]);
    let gram = basis_mat.ad_mul(&basis_mat);
    let condition = linalg::hermitian_condition(&gram);

    let lq = l_matrix(model, &q);
    let restriction = q.ad_mul(&lq);
    let defect = &lq - &q * &restriction;
    let closure_residual = defect.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    if mode == BuildMode::ExactSpan && closure_residual > tolerance {
        return Err(Error::NotInvariant {
            residual: closure_residual,
            tolerance,
        });
    }
    let basis = basis_coords.iter().map(|x| model.from_coords(x, 0.0)).collect();
    Ok(InvariantSubspace {
        generators,
        mode,
        basis,
        gram,
        condition,
        q,
        restriction,
        closure_residual,
        tolerance,
        fiber_dim: model.fiber_dim(),
        trunc_len: model.trunc_len(),
    })
}

/// Orthonormal basis of the column span, refusing ill-conditioned sets.
fn orthonormalize(x: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let gram = x.ad_mul(x);
    let condition = linalg::hermitian_condition(&gram);
    if condition > MAX_GRAM_CONDITION {
        return Err(Error::DependentGenerators { condition });
    }
    // two passes of modified Gram-Schmidt
    let mut q = x.clone();
    for j in 0..q.ncols() {
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i).into_owned();
                let c = qi.dotc(&q.column(j));
                let mut col = q.column_mut(j);
                col -= qi * c;
            }
        }
        let n = q.column(j).norm();
        q.column_mut(j).unscale_mut(n);
    }
    Ok(q)
}

/// Rank-revealing Gram-Schmidt over `g, L g, .., L^{K-1} g`.
fn orbit_basis(model: &SpaceModel, coords: &[Vec<Complex64>], k: usize) -> (Vec<Vec<Complex64>>, DMatrix<Complex64>) {
    let mut kept: Vec<Vec<Complex64>> = Vec::new();
    let mut qcols: Vec<DVector<Complex64>> = Vec::new();
    for g in coords {
        let mut v = g.clone();
        for _ in 0..k {
            let norm = linalg::vec_norm(&v);
            if norm == 0.0 {
                break;
            }
            let mut w = DVector::from_column_slice(&v);
            for _ in 0..2 {
                for qc in &qcols {
                    let c = qc.dotc(&w);
                    w -= qc * c;
                }
            }
            let rest = w.norm();
            if rest > ORBIT_DEFLATION * norm {
                qcols.push(w.unscale(rest));
                kept.push(v.clone());
            }
            v = l_coords(model, &v);
        }
    }
    let q = DMatrix::from_columns(&qcols);
    (kept, q)
}

impl InvariantSubspace {
    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn mode(&self) -> BuildMode {
        self.mode
    }

    pub fn generators(&self) -> &[CoeffFunction] {
        &self.generators
    }

    pub fn basis(&self) -> &[CoeffFunction] {
        &self.basis
    }

    /// Gram matrix of [`basis`](Self::basis).
    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    pub fn gram_condition(&self) -> f64 {
        self.condition
    }

    /// Orthonormal basis as columns of coordinates.
    pub fn orthonormal_basis(&self) -> &DMatrix<Complex64> {
        &self.q
    }

    /// `A = Q^H L Q`, similar to the restriction written in [`basis`](Self::basis).
    pub fn restriction(&self) -> &DMatrix<Complex64> {
        &self.restriction
    }

    /// `max_j ||L q_j - Q A e_j||` over the orthonormal columns.
    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn is_certified(&self) -> bool {
        self.closure_residual <= self.tolerance
    }

    pub(crate) fn check_model(&self, model: &SpaceModel) -> Result<()> {
        if model.fiber_dim() != self.fiber_dim || model.trunc_len() != self.trunc_len {
            return Err(Error::DimensionMismatch(format!(
                "subspace was built for d = {}, N = {}; model has d = {}, N = {}",
                self.fiber_dim,
                self.trunc_len,
                model.fiber_dim(),
                model.trunc_len()
            )));
        }
        Ok(())
    }

    fn projection_residual(&self, x: &DVector<Complex64>) -> f64 {
        linalg::distance_to_span(&self.q, x)
    }

    /// Solves `(I - lambda A) y = Q^H f` and returns `g = Q y`. `f` must be a
    /// member of the subspace.
    pub fn resolvent(&self, model: &SpaceModel, f: &CoeffFunction, lambda: Complex64) -> Result<SubspaceSolve> {
        self.check_model(model)?;
        let x = DVector::from_vec(model.coords(f)?);
        let f_norm = x.norm();
        let proj_residual = self.projection_residual(&x);
        if f_norm > 0.0 && proj_residual > self.tolerance * f_norm {
            return Err(Error::NotInSubspace {
                residual: proj_residual / f_norm,
            });
        }
        let m = self.dim();
        let system = DMatrix::<Complex64>::identity(m, m) - &self.restriction * lambda;
        let sigma_min = linalg::dense_smallest_singular_value(&system);
        let a_norm = self.restriction.clone().singular_values().max();
        let threshold = (10.0 * self.closure_residual).max(1e-12) * (1.0 + lambda.norm() * a_norm);
        if sigma_min <= threshold {
            return Err(Error::SpectrumHit { lambda, sigma_min });
        }
        let rhs = self.q.ad_mul(&x);
        let y = system
            .lu()
            .solve(&rhs)
            .ok_or(Error::SpectrumHit { lambda, sigma_min })?;
        let g = &self.q * &y;
        let y_l1: f64 = y.iter().map(|c| c.norm()).sum();
        let error_estimate = model.weights().mz_norm()
            * (lambda.norm() * self.closure_residual * y_l1 + proj_residual + f.tail_bound());
        Ok(SubspaceSolve {
            g: model.from_coords(g.as_slice(), 0.0),
            sigma_min,
            error_estimate,
            certified: self.is_certified(),
        })
    }
}

/// Eigenvalues of the restriction matrix.
pub fn restriction_spectrum(sub: &InvariantSubspace) -> Vec<Complex64> {
    linalg::eigenvalues(&sub.restriction)
}

/// Relative distance `||f - P_M f|| / ||f||` and the verdict against the
/// subspace tolerance.
pub fn membership_test(model: &SpaceModel, sub: &InvariantSubspace, f: &CoeffFunction) -> Result<Membership> {
    sub.check_model(model)?;
    let x = DVector::from_vec(model.coords(f)?);
    let norm = x.norm();
    if norm == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let residual = sub.projection_residual(&x) / norm;
    Ok(Membership {
        is_member: residual <= sub.tolerance,
        residual,
        threshold: sub.tolerance,
    })
}

/// Decides whether `1/lambda` is an eigenvalue of `L|_M` in two independent
/// ways: by searching the span of the eigenvectors `(M_z - lambda)^{-1} h`,
/// `h` in the span of `kernel_basis`, for a member of `M`, and by comparing
/// with the eigenvalues of the restriction matrix.
pub fn point_spectrum_restriction(
    model: &SpaceModel,
    sub: &InvariantSubspace,
    lambda: Complex64,
    kernel_basis: &[Vec<Complex64>],
) -> Result<PointSpectrumVerdict> {
    sub.check_model(model)?;
    if kernel_basis.is_empty() {
        return Err(Error::InvalidParameter("kernel basis is empty".into()));
    }
    let cols = kernel_basis
        .iter()
        .map(|e| model.coords(&eigenvector_at(model, lambda, e)?))
        .collect::<Result<Vec<_>>>()?;
    let v = DMatrix::from_fn(model.dim(), cols.len(), |r, c| cols[c][r]);
    let w = linalg::range_basis(&v, 1e-12);
    let outside = &w - &sub.q * sub.q.ad_mul(&w);
    let membership_residual = linalg::dense_smallest_singular_value(&outside);

    let mu = lambda.inv();
    let eigenvalue_distance = restriction_spectrum(sub)
        .iter()
        .map(|a| (a - mu).norm())
        .fold(f64::INFINITY, f64::min);
    let threshold = sub.tolerance;
    Ok(PointSpectrumVerdict {
        by_membership: membership_residual <= threshold,
        membership_residual,
        by_eigenvalue: eigenvalue_distance <= threshold,
        eigenvalue_distance,
        threshold,
    })
}

/// For each `a` in the disc compares `a in sigma(A)` with `1/(1 - a z) in M`.
pub fn arr_disc_check(model: &SpaceModel, sub: &InvariantSubspace, samples: &[Complex64]) -> Result<Vec<ArrEntry>> {
    sub.check_model(model)?;
    if model.fiber_dim() != 1 {
        return Err(Error::Precondition("the disc identity is checked in the scalar case d = 1".into()));
    }
    let spectrum = restriction_spectrum(sub);
    samples
        .iter()
        .map(|&a| {
            let k = model.szego_kernel(a, &[Complex64::ONE])?;
            let is_member = membership_test(model, sub, &k)?.is_member;
            let in_spectrum = spectrum.iter().any(|mu| (mu - a).norm() <= sub.tolerance);
            Ok(ArrEntry {
                a,
                in_spectrum,
                is_member,
                agree: in_spectrum == is_member,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspace::{make_space, WeightKind, DEFAULT_TOL};
    use crate::resolvent::{continue_f, kernel_component_c, resolvent_r};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hardy(n: usize) -> SpaceModel {
        make_space(WeightKind::Hardy, 1, n, DEFAULT_TOL).unwrap()
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn single_kernel_subspace() {
        let m = hardy(256);
        let sub = build_subspace(&m, &[m.szego(0.5).unwrap()], BuildMode::ExactSpan).unwrap();
        assert_eq!(sub.dim(), 1);
        assert!((sub.restriction()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-14);
        assert!(sub.closure_residual() < 1e-15);
        assert!((restriction_spectrum(&sub)[0] - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn two_kernel_subspace_spectrum() {
        let m = hardy(256);
        let gens = [m.szego(0.3).unwrap(), m.szego(-0.6).unwrap()];
        let sub = build_subspace(&m, &gens, BuildMode::ExactSpan).unwrap();
        let eig = sorted_re(restriction_spectrum(&sub));
        assert!((eig[0] - c(-0.6, 0.0)).norm() < 1e-8);
        assert!((eig[1] - c(0.3, 0.0)).norm() < 1e-8);
        assert!((sub.gram()[(0, 1)] - c(1.0 / 1.18, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_invariant_span_is_refused() {
        let m = hardy(64);
        let z = CoeffFunction::monomial(1, &[Complex64::ONE]);
        assert!(matches!(
            build_subspace(&m, std::slice::from_ref(&z), BuildMode::ExactSpan),
            Err(Error::NotInvariant { .. })
        ));
        let orbit = build_subspace(&m, &[z], BuildMode::OrbitClosure(2)).unwrap();
        assert_eq!(orbit.dim(), 2);
        assert!(orbit.closure_residual() < 1e-15);
    }

    #[test]
    fn constants_have_zero_spectrum() {
        let m = hardy(32);
        let sub = build_subspace(&m, &m.kernel_basis(), BuildMode::ExactSpan).unwrap();
        assert_eq!(restriction_spectrum(&sub), vec![Complex64::ZERO]);
    }

    #[test]
    fn dependent_generators_are_refused() {
        let m = hardy(64);
        let k = m.szego(0.5).unwrap();
        assert!(matches!(
            build_subspace(&m, &[k.clone(), k.scale(c(2.0, 0.0))], BuildMode::ExactSpan),
            Err(Error::DependentGenerators { .. })
        ));
        assert!(build_subspace(&m, &[], BuildMode::ExactSpan).is_err());
    }

    #[test]
    fn membership_examples() {
        let m = hardy(256);
        let k5 = m.szego(0.5).unwrap();
        let sub = build_subspace(&m, std::slice::from_ref(&k5), BuildMode::ExactSpan).unwrap();
        let r = membership_test(&m, &sub, &k5).unwrap();
        assert!(r.is_member && r.residual < 1e-14);

        // oracle: 1 - |<k_a,k_b>|^2 / (|k_a|^2 |k_b|^2) with <k_a,k_b> = 1/(1-ab)
        let k9 = m.szego(0.9).unwrap();
        let r = membership_test(&m, &sub, &k9).unwrap();
        let (a, b) = (0.5f64, 0.9f64);
        let cos2 = (1.0 - a * a) * (1.0 - b * b) / (1.0 - a * b).powi(2);
        assert!(!r.is_member);
        assert!(r.residual > 0.1);
        assert!((r.residual - (1.0 - cos2).sqrt()).abs() < 1e-10);

        let gens = [m.szego(0.3).unwrap(), m.szego(-0.6).unwrap()];
        let sub2 = build_subspace(&m, &gens, BuildMode::ExactSpan).unwrap();
        let f = gens[0].scale(c(3.0, 0.0)).sub(&gens[1]).unwrap();
        assert!(membership_test(&m, &sub2, &f).unwrap().is_member);
        assert!(matches!(
            membership_test(&m, &sub2, &CoeffFunction::zero(1, 4)),
            Err(Error::ZeroFunction)
        ));
    }

    #[test]
    fn point_spectrum_examples() {
        let m = hardy(256);
        let sub = build_subspace(&m, &[m.szego(0.5).unwrap()], BuildMode::ExactSpan).unwrap();
        let one = vec![vec![Complex64::ONE]];
        let v = point_spectrum_restriction(&m, &sub, c(2.0, 0.0), &one).unwrap();
        assert!(v.holds() && v.agree());
        let v = point_spectrum_restriction(&m, &sub, c(4.0, 0.0), &one).unwrap();
        assert!(!v.holds() && v.agree());
        assert!(point_spectrum_restriction(&m, &sub, c(0.5, 0.0), &one).is_err());

        let m2 = make_space(WeightKind::Hardy, 2, 128, DEFAULT_TOL).unwrap();
        let e0 = vec![Complex64::ONE, Complex64::ZERO];
        let e1 = vec![Complex64::ZERO, Complex64::ONE];
        let sub2 = build_subspace(&m2, &[m2.szego_kernel(c(0.5, 0.0), &e0).unwrap()], BuildMode::ExactSpan).unwrap();
        let only_e1 = point_spectrum_restriction(&m2, &sub2, c(2.0, 0.0), std::slice::from_ref(&e1)).unwrap();
        assert!(!only_e1.holds());
        let both = point_spectrum_restriction(&m2, &sub2, c(2.0, 0.0), &[e0, e1]).unwrap();
        assert!(both.holds() && both.agree());
    }

    #[test]
    fn arr_examples() {
        let m = hardy(256);
        let sub = build_subspace(&m, &[m.szego(0.5).unwrap()], BuildMode::ExactSpan).unwrap();
        let r = arr_disc_check(&m, &sub, &[c(0.5, 0.0), c(0.25, 0.0)]).unwrap();
        assert!(r[0].in_spectrum && r[0].is_member && r[0].agree);
        assert!(!r[1].in_spectrum && !r[1].is_member && r[1].agree);
        assert!(arr_disc_check(&m, &sub, &[]).unwrap().is_empty());

        let consts = build_subspace(&m, &m.kernel_basis(), BuildMode::ExactSpan).unwrap();
        let r = arr_disc_check(&m, &consts, &[Complex64::ZERO]).unwrap();
        assert!(r[0].in_spectrum && r[0].is_member);
    }

    #[test]
    fn subspace_resolvent_and_continuation() {
        let m = hardy(256);
        let k = m.szego(0.5).unwrap();
        let sub = build_subspace(&m, std::slice::from_ref(&k), BuildMode::ExactSpan).unwrap();
        let lam = c(1.6, 0.0);
        let g = resolvent_r(&m, &k, lam, Some(&sub)).unwrap();
        assert!(m.norm(&g.sub(&k.scale(c(5.0, 0.0))).unwrap()) < 1e-12);
        let kc = kernel_component_c(&m, &k, lam, Some(&sub)).unwrap();
        assert!((kc.c.coeff(0)[0] - c(5.0, 0.0)).norm() < 1e-12);
        let r = continue_f(&m, &k, lam, Some(&sub)).unwrap();
        assert!((r.value[0] - c(5.0, 0.0)).norm() < 1e-12);
        assert!(r.in_paper_domain);
        assert!(matches!(
            continue_f(&m, &k, c(2.0, 0.0), Some(&sub)),
            Err(Error::SpectrumHit { .. })
        ));
    }

    #[test]
    fn orbit_residual_shrinks_with_k() {
        // rational generator with three poles: the orbit closes at K = 3
        let m = hardy(256);
        let gens = [m.szego(0.5).unwrap(), m.szego(-0.4).unwrap(), m.szego(0.7).unwrap()];
        let f = gens[0].add_scaled(Complex64::ONE, &gens[1]).unwrap().add_scaled(Complex64::ONE, &gens[2]).unwrap();
        let res: Vec<f64> = (1..=4)
            .map(|k| build_subspace(&m, std::slice::from_ref(&f), BuildMode::OrbitClosure(k)).unwrap().closure_residual())
            .collect();
        assert!(res.windows(2).all(|w| w[1] <= w[0] + 1e-15), "{res:?}");
        assert!(res[2] < 1e-10);
    }

    #[test]
    fn descriptor_json() {
        let m = hardy(32);
        let js = r#"{"generators":[{"fiber_dim":1,"coeffs":[[1.0,0.0]]}],"mode":"exact_span"}"#;
        let d: SubspaceDescriptor = serde_json::from_str(js).unwrap();
        assert_eq!(d.tolerance, DEFAULT_SUBSPACE_TOL);
        assert_eq!(d.build(&m).unwrap().dim(), 1);
        let js = r#"{"generators":[{"fiber_dim":1,"coeffs":[[0.0,0.0],[1.0,0.0]]}],"mode":{"orbit_closure":3},"tolerance":1e-8}"#;
        let d: SubspaceDescriptor = serde_json::from_str(js).unwrap();
        assert_eq!(d.mode, BuildMode::OrbitClosure(3));
        assert_eq!(d.build(&m).unwrap().dim(), 2);
        assert!(serde_json::from_str::<SubspaceDescriptor>(r#"{"generators":[],"mode":"span"}"#).is_err());
    }
}
