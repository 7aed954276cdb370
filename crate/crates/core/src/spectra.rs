//! Spectral indicators for truncated operators: smallest singular values,
//! grid scans, spectral-radius estimates and the reciprocity between the
//! exterior of `sigma(M_z)` and eigenvalues of `L`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffspace::{unit_vector, CoeffFunction, SpaceModel, WeightKind};
use crate::error::{Error, Result};
use crate::linalg::{self, Bidiagonal};
use crate::probes;
use crate::resolvent::eigenvector_at;
use crate::subspaces::{l_coords, InvariantSubspace};

/// Smallest truncation accepted by [`svd_indicator`].
pub const MIN_EFFECTIVE_TRUNCATION: usize = 4;
/// Default distance factor from `sigma(M_z)` for exterior samples.
pub const EXTERIOR_MARGIN: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorTag {
    Mz,
    L,
    RestrictionMatrix,
}

impl OperatorTag {
    pub fn name(self) -> &'static str {
        match self {
            OperatorTag::Mz => "mz",
            OperatorTag::L => "l",
            OperatorTag::RestrictionMatrix => "restriction_matrix",
        }
    }
}

/// An operator whose spectrum is probed.
#[derive(Clone, Copy, Debug)]
pub enum Operator<'a> {
    Mz,
    L,
    Restriction(&'a InvariantSubspace),
}

impl Operator<'_> {
    pub fn tag(&self) -> OperatorTag {
        match self {
            Operator::Mz => OperatorTag::Mz,
            Operator::L => OperatorTag::L,
            Operator::Restriction(_) => OperatorTag::RestrictionMatrix,
        }
    }
}

fn check_effective(model: &SpaceModel, n_eff: usize) -> Result<()> {
    if n_eff < MIN_EFFECTIVE_TRUNCATION {
        return Err(Error::TruncationTooSmall {
            given: n_eff,
            min: MIN_EFFECTIVE_TRUNCATION,
        });
    }
    if n_eff > model.trunc_len() {
        return Err(Error::InvalidParameter(format!(
            "effective truncation {n_eff} exceeds the model truncation {}",
            model.trunc_len()
        )));
    }
    Ok(())
}

fn up_ratios(model: &SpaceModel, count: usize) -> Vec<f64> {
    let w = model.weights();
    (0..count).map(|n| w.beta(n + 1) / w.beta(n)).collect()
}

/// `sigma_min` of the truncated `T - lambda`. For `M_z` the truncation maps
/// degrees `< N_eff` into degrees `<= N_eff`; for `L` it is the square block
/// on degrees `< N_eff`. The fiber dimension only repeats identical blocks.
/// The restriction matrix is used as is.
pub fn svd_indicator(model: &SpaceModel, op: Operator<'_>, lambda: Complex64, n_eff: usize) -> Result<f64> {
    check_effective(model, n_eff)?;
    let shift = lambda.norm();
    Ok(match op {
        Operator::Mz => Bidiagonal::tall(vec![shift; n_eff], up_ratios(model, n_eff)).smallest_singular_value(),
        Operator::L => {
            let off = up_ratios(model, n_eff - 1).into_iter().map(f64::recip).collect();
            Bidiagonal::upper(vec![shift; n_eff], off).smallest_singular_value()
        }
        Operator::Restriction(sub) => {
            sub.check_model(model)?;
            restriction_indicator(sub.restriction(), lambda)
        }
    })
}

fn restriction_indicator(a: &DMatrix<Complex64>, lambda: Complex64) -> f64 {
    let m = a.nrows();
    let shifted = a - DMatrix::<Complex64>::identity(m, m) * lambda;
    linalg::dense_smallest_singular_value(&shifted)
}

/// Two-sided indicator: the smaller of [`svd_indicator`] and `sigma_min` of
/// the square truncation of `(T - lambda)^*`. A left-invertible `T - lambda`
/// with non-dense range is invisible to the first alone, which is the case of
/// `M_z` inside the disc.
pub fn spectrum_indicator(model: &SpaceModel, op: Operator<'_>, lambda: Complex64, n_eff: usize) -> Result<f64> {
    let direct = svd_indicator(model, op, lambda, n_eff)?;
    Ok(match op {
        Operator::Mz => {
            let adjoint = Bidiagonal::upper(vec![lambda.norm(); n_eff], up_ratios(model, n_eff - 1));
            direct.min(adjoint.smallest_singular_value())
        }
        _ => direct,
    })
}

/// Square grid `center + (x + iy)`, `x, y` in `[-radius, radius]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: Complex64,
    pub radius: f64,
    pub resolution: usize,
}

impl GridSpec {
    /// Grid points in row-major order: rows by increasing imaginary part,
    /// columns by increasing real part. A zero radius gives the center alone.
    pub fn points(&self) -> Result<Vec<Complex64>> {
        if self.resolution < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution {} is below 8",
                self.resolution
            )));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid radius {} is invalid", self.radius)));
        }
        if self.radius == 0.0 {
            return Ok(vec![self.center]);
        }
        let r = self.resolution;
        let step = 2.0 * self.radius / (r - 1) as f64;
        let axis = |i: usize| -self.radius + step * i as f64;
        Ok((0..r)
            .flat_map(|row| (0..r).map(move |col| (row, col)))
            .map(|(row, col)| self.center + Complex64::new(axis(col), axis(row)))
            .collect())
    }
}

/// Indicator values over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralScan {
    pub grid: Vec<Complex64>,
    pub indicator: Vec<f64>,
    pub trunc_len: usize,
    pub operator_tag: OperatorTag,
    pub weights: WeightKind,
    pub spec: GridSpec,
}

pub fn scan_grid(model: &SpaceModel, op: Operator<'_>, spec: GridSpec) -> Result<SpectralScan> {
    let grid = spec.points()?;
    let n_eff = model.trunc_len();
    let indicator = grid
        .par_iter()
        .map(|&lambda| svd_indicator(model, op, lambda, n_eff))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralScan {
        grid,
        indicator,
        trunc_len: n_eff,
        operator_tag: op.tag(),
        weights: model.kind(),
        spec,
    })
}

impl SpectralScan {
    /// Worst violation of `|s_i - s_j| <= |lambda_i - lambda_j|` over
    /// horizontally and vertically adjacent grid points (0 when none).
    pub fn lipschitz_excess(&self) -> f64 {
        let r = self.spec.resolution;
        if self.grid.len() != r * r {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for row in 0..r {
            for col in 0..r {
                let i = row * r + col;
                for j in [(col + 1 < r).then_some(i + 1), (row + 1 < r).then_some(i + r)].into_iter().flatten() {
                    let gap = (self.indicator[i] - self.indicator[j]).abs();
                    worst = worst.max(gap - (self.grid[i] - self.grid[j]).norm());
                }
            }
        }
        worst
    }

    /// CSV with `#` metadata lines, then `re,im,indicator`.
    pub fn to_csv(&self, extra_metadata: &[(String, String)]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# operator_tag={}", self.operator_tag.name());
        let _ = writeln!(out, "# N={}", self.trunc_len);
        let _ = writeln!(out, "# weights={}", self.weights.name());
        let _ = writeln!(
            out,
            "# grid=center:{}{:+}i,radius:{},resolution:{}",
            self.spec.center.re, self.spec.center.im, self.spec.radius, self.spec.resolution
        );
        for (k, v) in extra_metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("re,im,indicator\n");
        for (z, s) in self.grid.iter().zip(&self.indicator) {
            let _ = writeln!(out, "{:e},{:e},{:e}", z.re, z.im, s);
        }
        out
    }
}

/// Gelfand-type estimate `max_x (||T^k x|| / ||x||)^{1/k}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusEstimate {
    pub estimate: f64,
    /// The estimate after `k = 1..=iterations` steps.
    pub sequence: Vec<f64>,
    pub probe_count: usize,
}

fn mz_coords(model: &SpaceModel, x: &[Complex64]) -> Vec<Complex64> {
    let d = model.fiber_dim();
    let w = model.weights();
    let mut y = vec![Complex64::ZERO; x.len()];
    for n in 0..model.trunc_len() {
        let r = w.beta(n + 1) / w.beta(n);
        for j in 0..d {
            y[(n + 1) * d + j] = x[n * d + j] * r;
        }
    }
    y
}

/// Default probes: seeded random polynomials of low degree, so that `M_z`
/// powers stay exact, and kernel functions `e_j / (1 - a z)` with `a` close to
/// the radius of the space.
pub fn default_radius_probes(model: &SpaceModel, iterations: usize) -> Vec<CoeffFunction> {
    let mut rng = probes::rng(probes::DEFAULT_SEED);
    let degree = model.trunc_len().saturating_sub(iterations) / 2;
    let mut out: Vec<CoeffFunction> = (0..8).map(|_| probes::random_polynomial(model, degree, &mut rng)).collect();
    let radius = model.evaluation_radius();
    for a in [0.9, 0.99] {
        for j in 0..model.fiber_dim() {
            let e = unit_vector(model.fiber_dim(), j);
            let k = CoeffFunction::geometric(Complex64::new(a / radius, 0.0), model.trunc_len() + 1, &e);
            out.push(k);
        }
    }
    out
}

pub fn spectral_radius_estimate(
    model: &SpaceModel,
    op: Operator<'_>,
    iterations: usize,
    probes: Option<&[CoeffFunction]>,
) -> Result<RadiusEstimate> {
    if iterations < 4 {
        return Err(Error::InvalidParameter(format!("iterations = {iterations} is below 4")));
    }
    let vectors: Vec<Vec<Complex64>> = match op {
        Operator::Restriction(sub) => {
            sub.check_model(model)?;
            let m = sub.dim();
            let mut rng = probes::rng(probes::DEFAULT_SEED);
            let mut v: Vec<Vec<Complex64>> = (0..m).map(|j| unit_vector(m, j)).collect();
            v.extend((0..4).map(|_| (0..m).map(|_| probes::complex_gaussian(&mut rng)).collect()));
            v
        }
        _ => {
            let owned;
            let list = match probes {
                Some(p) => p,
                None => {
                    owned = default_radius_probes(model, iterations);
                    &owned
                }
            };
            list.iter().map(|f| model.coords(f)).collect::<Result<_>>()?
        }
    };
    let probe_count = vectors.len();
    let mut best = vec![0.0f64; iterations];
    for x0 in &vectors {
        let n0 = linalg::vec_norm(x0);
        if n0 == 0.0 {
            continue;
        }
        let mut x = x0.clone();
        for (k, slot) in best.iter_mut().enumerate() {
            x = match op {
                Operator::Mz => mz_coords(model, &x),
                Operator::L => l_coords(model, &x),
                Operator::Restriction(sub) => {
                    let v = nalgebra::DVector::from_column_slice(&x);
                    (sub.restriction() * v).as_slice().to_vec()
                }
            };
            let ratio = linalg::vec_norm(&x) / n0;
            *slot = slot.max(ratio.powf(1.0 / (k + 1) as f64));
        }
    }
    Ok(RadiusEstimate {
        estimate: best[iterations - 1],
        sequence: best,
        probe_count,
    })
}

/// Per-sample result of [`reciprocal_spectrum_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReciprocalEntry {
    pub lambda: Complex64,
    /// `||L v - v / lambda||` for the witness `v = (M_z - lambda)^{-1} e_1`.
    pub witness_residual: f64,
    /// Tail bound recorded on the witness.
    pub tail_bound: f64,
    /// Rigorous bound `(||L|| + 1/|lambda|) * tail_bound` for the residual.
    pub residual_bound: f64,
    /// `(N_eff, sigma_min(L - 1/lambda))` under truncation doubling.
    pub indicators: Vec<(usize, f64)>,
    pub passed: bool,
}

/// Exhibits `1/lambda` in `sigma_p(L)` for each `|lambda|` beyond the margin:
/// the witness eigenvector's residual must respect its bound and the `L`
/// indicator at `1/lambda` must decrease as the truncation doubles.
pub fn reciprocal_spectrum_check(model: &SpaceModel, samples: &[Complex64]) -> Result<Vec<ReciprocalEntry>> {
    let radius = model.evaluation_radius();
    if let Some(bad) = samples.iter().find(|l| l.norm() < EXTERIOR_MARGIN * radius) {
        return Err(Error::Precondition(format!(
            "|lambda| = {} must be at least {} (margin {EXTERIOR_MARGIN} beyond sigma(M_z))",
            bad.norm(),
            EXTERIOR_MARGIN * radius
        )));
    }
    let e = unit_vector(model.fiber_dim(), 0);
    samples.iter().map(|&lambda| reciprocal_witness(model, lambda, &e)).collect()
}

/// Witness eigenvector `(M_z - lambda)^{-1} e` and the `L` indicator at
/// `1/lambda` under truncation doubling, without the margin precondition.
pub fn reciprocal_witness(model: &SpaceModel, lambda: Complex64, e: &[Complex64]) -> Result<ReciprocalEntry> {
    let n = model.trunc_len();
    let levels: Vec<usize> = [n / 4, n / 2, n].into_iter().filter(|k| *k >= MIN_EFFECTIVE_TRUNCATION).collect();
    let v = eigenvector_at(model, lambda, e)?;
    let lv = model.apply_l(&v)?;
    let witness_residual = model.norm(&lv.sub(&v.scale(lambda.inv()))?);
    let tail_bound = v.tail_bound();
    let residual_bound = (model.weights().l_norm() + 1.0 / lambda.norm()) * tail_bound;
    let indicators = levels
        .iter()
        .map(|&k| Ok((k, svd_indicator(model, Operator::L, lambda.inv(), k)?)))
        .collect::<Result<Vec<_>>>()?;
    let decreasing = indicators.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
    let small = indicators.last().is_some_and(|(_, s)| *s <= model.tol().sqrt());
    Ok(ReciprocalEntry {
        lambda,
        witness_residual,
        tail_bound,
        residual_bound,
        indicators,
        passed: witness_residual <= residual_bound && decreasing && small,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspace::{make_space, DEFAULT_TOL};
    use crate::linalg::dense_smallest_singular_value;
    use crate::subspaces::{build_subspace, BuildMode};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hardy(n: usize) -> SpaceModel {
        make_space(WeightKind::Hardy, 1, n, DEFAULT_TOL).unwrap()
    }

    fn dense_op(model: &SpaceModel, tag: OperatorTag, lambda: Complex64, n_eff: usize) -> DMatrix<Complex64> {
        let w = model.weights();
        match tag {
            OperatorTag::Mz => DMatrix::from_fn(n_eff + 1, n_eff, |r, col| {
                if r == col {
                    -lambda
                } else if r == col + 1 {
                    c(w.beta(r) / w.beta(col), 0.0)
                } else {
                    Complex64::ZERO
                }
            }),
            _ => DMatrix::from_fn(n_eff, n_eff, |r, col| {
                if r == col {
                    -lambda
                } else if col == r + 1 {
                    c(w.beta(r) / w.beta(col), 0.0)
                } else {
                    Complex64::ZERO
                }
            }),
        }
    }

    #[test]
    fn indicator_matches_dense_svd() {
        for kind in [WeightKind::Hardy, WeightKind::Bergman, WeightKind::Dirichlet] {
            let m = make_space(kind, 1, 40, DEFAULT_TOL).unwrap();
            for lam in [c(0.3, 0.2), c(-1.2, 0.5), c(0.0, 2.0)] {
                for (op, tag) in [(Operator::Mz, OperatorTag::Mz), (Operator::L, OperatorTag::L)] {
                    let fast = svd_indicator(&m, op, lam, 24).unwrap();
                    let dense = dense_smallest_singular_value(&dense_op(&m, tag, lam, 24));
                    assert!((fast - dense).abs() <= 1e-12 * (1.0 + dense), "{kind:?} {tag:?} {lam}: {fast} vs {dense}");
                }
            }
        }
    }

    #[test]
    fn indicator_examples() {
        let m = hardy(256);
        assert!((svd_indicator(&m, Operator::Mz, Complex64::ZERO, 64).unwrap() - 1.0).abs() < 1e-14);
        let half: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&k| svd_indicator(&m, Operator::L, c(0.5, 0.0), k).unwrap())
            .collect();
        assert!(half[1] < half[0] && half[2] < half[1] && half[2] < 1e-15);
        for k in [64, 128, 256] {
            assert!(svd_indicator(&m, Operator::L, c(2.0, 0.0), k).unwrap() >= 1.0 - 1e-12);
        }
        assert!(matches!(
            svd_indicator(&m, Operator::L, Complex64::ZERO, 3),
            Err(Error::TruncationTooSmall { .. })
        ));
        assert!(svd_indicator(&m, Operator::L, Complex64::ZERO, 300).is_err());
    }

    #[test]
    fn mz_interior_needs_two_sided_indicator() {
        let m = hardy(256);
        for lam in [Complex64::ZERO, c(0.5, 0.0), c(0.0, 0.5)] {
            let one_sided: Vec<f64> = [64, 128, 256].iter().map(|&k| svd_indicator(&m, Operator::Mz, lam, k).unwrap()).collect();
            assert!(one_sided.iter().all(|s| *s >= 1.0 - lam.norm() - 1e-12));
            let two: Vec<f64> = [64, 128, 256].iter().map(|&k| spectrum_indicator(&m, Operator::Mz, lam, k).unwrap()).collect();
            assert!(two[2] <= two[0] && two[2] < 1e-15, "{lam}: {two:?}");
        }
        assert!(spectrum_indicator(&m, Operator::Mz, c(1.5, 0.0), 256).unwrap() >= 0.5 - 1e-12);
    }

    #[test]
    fn grid_layout() {
        let spec = GridSpec {
            center: c(1.0, -1.0),
            radius: 0.0,
            resolution: 8,
        };
        assert_eq!(spec.points().unwrap(), vec![c(1.0, -1.0)]);
        let spec = GridSpec {
            center: Complex64::ZERO,
            radius: 1.0,
            resolution: 8,
        };
        let p = spec.points().unwrap();
        assert_eq!(p.len(), 64);
        assert_eq!(p[0], c(-1.0, -1.0));
        assert_eq!(p[7], c(1.0, -1.0));
        assert_eq!(p[63], c(1.0, 1.0));
        assert!(GridSpec { resolution: 7, ..spec }.points().is_err());
    }

    #[test]
    fn hardy_l_scan() {
        let m = hardy(256);
        let spec = GridSpec {
            center: Complex64::ZERO,
            radius: 1.5,
            resolution: 64,
        };
        let scan = scan_grid(&m, Operator::L, spec).unwrap();
        assert_eq!(scan.indicator.len(), 64 * 64);
        for (z, s) in scan.grid.iter().zip(&scan.indicator) {
            assert!(*s >= 0.0);
            if z.norm() < 0.9 {
                assert!(*s < 0.05, "{z}: {s}");
            }
            if z.norm() > 1.2 {
                // ||(L - z)^{-1}|| <= 1 / (|z| - 1)
                assert!(*s >= z.norm() - 1.0 - 1e-12, "{z}: {s}");
            }
        }
        assert!(scan.lipschitz_excess() <= 1e-12);
        let csv = scan.to_csv(&[("seed".into(), "1".into())]);
        assert!(csv.starts_with("# operator_tag=l\n# N=256\n# weights=hardy\n"));
        assert!(csv.contains("# seed=1\nre,im,indicator\n"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 64 * 64 + 1);
    }

    #[test]
    fn restriction_scan_vanishes_only_at_eigenvalue() {
        let m = hardy(128);
        let sub = build_subspace(&m, &[m.szego(0.5).unwrap()], BuildMode::ExactSpan).unwrap();
        let spec = GridSpec {
            center: c(0.5, 0.0),
            radius: 0.5,
            resolution: 9,
        };
        let scan = scan_grid(&m, Operator::Restriction(&sub), spec).unwrap();
        for (z, s) in scan.grid.iter().zip(&scan.indicator) {
            assert!((s - (z - c(0.5, 0.0)).norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn radius_estimates() {
        let m = hardy(256);
        let mz = spectral_radius_estimate(&m, Operator::Mz, 32, None).unwrap();
        assert!((mz.estimate - 1.0).abs() < 1e-12);
        let l = spectral_radius_estimate(&m, Operator::L, 32, None).unwrap();
        assert!(l.estimate > 0.98 && l.estimate <= 1.0 + 1e-12, "{}", l.estimate);
        let one = [CoeffFunction::constant(&[Complex64::ONE])];
        let z = spectral_radius_estimate(&m, Operator::L, 8, Some(&one)).unwrap();
        assert_eq!(z.estimate, 0.0);
        assert!(spectral_radius_estimate(&m, Operator::L, 3, None).is_err());

        let sub = build_subspace(&m, &[m.szego(0.3).unwrap(), m.szego(-0.6).unwrap()], BuildMode::ExactSpan).unwrap();
        let r = spectral_radius_estimate(&m, Operator::Restriction(&sub), 200, None).unwrap();
        assert!((r.estimate - 0.6).abs() < 0.01, "{}", r.estimate);
    }

    #[test]
    fn reciprocal_examples() {
        let m = hardy(256);
        let r = reciprocal_spectrum_check(&m, &[c(2.0, 0.0), c(10.0, 0.0)]).unwrap();
        assert!(r.iter().all(|e| e.passed));
        assert!(r[0].witness_residual <= r[0].tail_bound);
        assert!(r[1].indicators[2].1 < r[0].indicators[2].1);
        assert!(matches!(
            reciprocal_spectrum_check(&m, &[c(1.0, 0.0)]),
            Err(Error::Precondition(_))
        ));
    }
}
