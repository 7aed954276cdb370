//! Verifiers producing reproducible [`CheckReport`]s.
//!
//! Checks never panic or return errors for failed properties: every measured
//! quantity is recorded next to its threshold. Errors are reserved for
//! violated preconditions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coeffspace::{unit_vector, CoeffFunction, SpaceModel};
use crate::error::{Error, Result};
use crate::linalg::{self, Bidiagonal};
use crate::probes;
use crate::resolvent::{decompose, eigenvector_at, neumann_series};
use crate::spectra::{self, spectrum_indicator, svd_indicator, Operator};
use crate::subspaces::{build_subspace, membership_test, BuildMode, InvariantSubspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

impl Relation {
    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => measured <= threshold,
            Relation::AtLeast => measured >= threshold,
            Relation::Equal => measured == threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Equal => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubCheck {
    pub sub_check: String,
    pub measured: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub details: Vec<SubCheck>,
    pub provenance: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Measured sequences, written as CSV by the command-line front end.
    #[serde(skip)]
    pub sequences: BTreeMap<String, Vec<f64>>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: false,
            details: Vec::new(),
            provenance: BTreeMap::new(),
            error: None,
            sequences: BTreeMap::new(),
        }
    }

    /// Report for a check that could not run.
    pub fn failed(name: impl Into<String>, err: &Error) -> Self {
        let mut r = Self::new(name);
        r.error = Some(err.to_string());
        r
    }

    pub fn push(&mut self, sub_check: impl Into<String>, measured: f64, threshold: f64, relation: Relation) -> bool {
        let passed = relation.holds(measured, threshold);
        self.details.push(SubCheck {
            sub_check: sub_check.into(),
            measured,
            threshold,
            relation,
            passed,
        });
        self.refresh();
        passed
    }

    pub fn provenance(&mut self, key: &str, value: Value) {
        self.provenance.insert(key.to_string(), value);
    }

    pub fn sequence(&mut self, key: impl Into<String>, values: Vec<f64>) {
        self.sequences.insert(key.into(), values);
    }

    fn refresh(&mut self) {
        self.passed = self.error.is_none() && !self.details.is_empty() && self.details.iter().all(|d| d.passed);
    }

    pub fn detail(&self, sub_check: &str) -> Option<&SubCheck> {
        self.details.iter().find(|d| d.sub_check == sub_check)
    }

    /// Names of failing sub-checks (or the error).
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .details
            .iter()
            .filter(|d| !d.passed)
            .map(|d| format!("{}: {} {} {} fails", d.sub_check, d.measured, d.relation.symbol(), d.threshold))
            .collect();
        if let Some(e) = &self.error {
            out.push(format!("error: {e}"));
        }
        out
    }

    /// Long-format CSV `series,index,value` of the measured sequences.
    pub fn sequences_csv(&self) -> String {
        let mut out = String::from("series,index,value\n");
        for (k, v) in &self.sequences {
            for (i, x) in v.iter().enumerate() {
                let _ = writeln!(out, "{k},{i},{x:e}");
            }
        }
        out
    }
}

fn model_provenance(report: &mut CheckReport, model: &SpaceModel) {
    report.provenance("weights", json!(model.kind().name()));
    report.provenance("d", json!(model.fiber_dim()));
    report.provenance("N", json!(model.trunc_len()));
    report.provenance("tol", json!(model.tol()));
}

fn c64(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Sampling parameters shared by the checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub seed: u64,
    pub probe_count: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            seed: probes::DEFAULT_SEED,
            probe_count: probes::DEFAULT_PROBE_COUNT,
        }
    }
}

/// The structural axioms of the model: bounded point evaluations, a
/// `d`-dimensional kernel of constants, decomposability inside the disc and
/// the disc as spectrum of `M_z`.
pub fn model_axioms_check(model: &SpaceModel, sampling: Sampling) -> CheckReport {
    let mut report = CheckReport::new("model_axioms");
    model_provenance(&mut report, model);
    report.provenance("seed", json!(sampling.seed));
    report.provenance("probe_count", json!(sampling.probe_count));
    let probes = probes::random_probes(model, sampling.probe_count, sampling.seed);
    let mut rng = probes::rng(sampling.seed ^ 0xa5a5);

    // (a) |f(z)| <= C_z ||f|| with C_z the stored evaluation norm
    let points: Vec<Complex64> = (0..16).map(|_| probes::annulus_point(&mut rng, 0.0, 0.9)).collect();
    let mut worst: f64 = 0.0;
    for z in &points {
        let cz = model.weights().point_evaluation_bound(z.norm());
        for f in &probes {
            let v = linalg::vec_norm(&f.evaluate_stored(*z));
            worst = worst.max(v / (cz * model.norm(f)));
        }
    }
    report.push("(a) point evaluation ratio |f(z)|/(C_z ||f||)", worst, 1.0 + 1e-12, Relation::AtMost);

    // (b) dimension of the kernel of L
    report.push(
        "(b) dim N(L)",
        model.kernel_dimension() as f64,
        model.fiber_dim() as f64,
        Relation::Equal,
    );

    // (c) kernel elements are constants, hence entire
    let non_entire = model
        .kernel_basis()
        .iter()
        .filter(|e| !(e.is_constant() && model.evaluate_kernel_element(e, Complex64::new(100.0, 0.0)).is_ok()))
        .count();
    report.push("(c) non-constant kernel elements", non_entire as f64, 0.0, Relation::Equal);

    // (d) f = (M_z - lambda) g + h for random f and |lambda| <= 0.9
    let lambdas: Vec<Complex64> = (0..8).map(|_| probes::annulus_point(&mut rng, 0.0, 0.9)).collect();
    let mut failures = 0usize;
    let mut worst_rel: f64 = 0.0;
    for lam in &lambdas {
        for f in probes.iter().take(8) {
            match decompose(model, f, *lam) {
                Ok(dec) => worst_rel = worst_rel.max(dec.residual / model.norm(f)),
                Err(_) => failures += 1,
            }
        }
    }
    report.push("(d) failed decompositions", failures as f64, 0.0, Relation::Equal);
    report.push("(d) decomposition residual / ||f||", worst_rel, 10.0 * model.tol(), Relation::AtMost);

    // (e) two-sided M_z indicator: small inside the unit disc, bounded below at |lambda| = 1.5
    let n = model.trunc_len();
    let interior = [
        Complex64::ZERO,
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(-0.6, 0.3),
    ];
    let inside = interior
        .iter()
        .map(|l| spectrum_indicator(model, Operator::Mz, *l, n).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    report.push("(e) M_z indicator inside |lambda| < 1", inside, 1e-6, Relation::AtMost);
    let outside = (0..8)
        .map(|k| Complex64::from_polar(1.5, k as f64 * std::f64::consts::TAU / 8.0))
        .map(|l| spectrum_indicator(model, Operator::Mz, l, n).unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    report.push("(e) M_z indicator on |lambda| = 1.5", outside, 0.05, Relation::AtLeast);
    report
}

/// `M_z^n` on coefficients: shift up by `n`, dropping nothing beyond the
/// stored length `N + 1`.
fn shift_up(model: &SpaceModel, g: &CoeffFunction, n: usize) -> CoeffFunction {
    let mut out = g.clone();
    for _ in 0..n {
        out = model.apply_mz(&out).expect("conforming input");
    }
    out
}

/// `||M_z^n L^n f||` for `n = 0..=n_max`: non-increasing, and negligible at
/// `n_max` up to the tail bound of `f`.
pub fn sot_decay_check(model: &SpaceModel, probes: &[CoeffFunction], n_max: usize) -> Result<CheckReport> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!("n_max = {n_max} is below 2")));
    }
    let mut report = CheckReport::new("sot_decay");
    model_provenance(&mut report, model);
    report.provenance("probe_count", json!(probes.len()));
    report.provenance("n_max", json!(n_max));

    let sequences = probes
        .par_iter()
        .map(|f| {
            let f = model.conform(f)?;
            let mut ln = f.clone();
            let mut seq = vec![model.norm(&f)];
            for n in 1..=n_max {
                ln = model.apply_l(&ln)?;
                // M_z^n L^n f lives on degrees n..N, so the shift is exact
                let back = if n <= model.trunc_len() {
                    shift_up(model, &ln, n)
                } else {
                    CoeffFunction::zero(model.fiber_dim(), 1)
                };
                seq.push(model.norm(&back));
            }
            Ok((model.norm(&f), f.tail_bound(), seq))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut growth: f64 = 0.0;
    let mut final_excess = f64::NEG_INFINITY;
    for (i, (norm, tail, seq)) in sequences.iter().enumerate() {
        for w in seq.windows(2) {
            growth = growth.max((w[1] - w[0]) / norm.max(f64::MIN_POSITIVE));
        }
        let last = *seq.last().unwrap();
        final_excess = final_excess.max(last - (model.tol() * norm + tail));
        if i < 4 {
            report.sequence(format!("probe{i}"), seq.clone());
        }
    }
    report.push("non-increasing: max relative step up", growth, 1e-14, Relation::AtMost);
    report.push(
        "final ||M_z^n L^n f|| - (tol ||f|| + tail)",
        final_excess.max(0.0),
        0.0,
        Relation::AtMost,
    );
    Ok(report)
}

/// The default probe set of the suite: random polynomials plus a kernel
/// function close to the radius.
pub fn sot_probes(model: &SpaceModel, sampling: Sampling) -> Vec<CoeffFunction> {
    let mut p = probes::random_probes(model, sampling.probe_count, sampling.seed);
    let a = Complex64::new(0.9 / model.evaluation_radius(), 0.0);
    if let Ok(k) = model.szego_kernel(a, &unit_vector(model.fiber_dim(), 0)) {
        p.push(k);
    }
    p
}

const CD_MARGIN: f64 = 0.05;

/// Per-sample measurements of [`cd_check`].
#[derive(Clone, Debug)]
struct CdSample {
    indicator_decay: f64,
    surj_residual: f64,
    surj_residual_half: f64,
    surj_norm_ratio: f64,
    kernel_dim: usize,
}

fn cd_sample(model: &SpaceModel, half: &SpaceModel, quarter_n: usize, omega: Complex64) -> Result<CdSample> {
    let n = model.trunc_len();
    let d = model.fiber_dim();

    // (i) omega in sigma(L): the L indicator decays under refinement
    let first = svd_indicator(model, Operator::L, omega, quarter_n)?;
    let last = svd_indicator(model, Operator::L, omega, n)?;
    let indicator_decay = if first == 0.0 { 0.0 } else { last / first };

    // (ii) (L - omega) x = e_j with x = M_z (I - omega M_z)^{-1} e_j
    let mut surj_residual: f64 = 0.0;
    let mut surj_residual_half: f64 = 0.0;
    let mut surj_norm_ratio: f64 = 0.0;
    for j in 0..d {
        let e = unit_vector(d, j);
        let mut norms = [0.0; 2];
        for (slot, m) in [half, model].into_iter().enumerate() {
            let x = m.apply_mz(&CoeffFunction::geometric(omega, m.trunc_len(), &e))?;
            let lhs = m.apply_l(&x)?.add_scaled(-omega, &x)?;
            let res = m.norm(&lhs.sub(&CoeffFunction::constant(&e))?);
            if slot == 0 {
                surj_residual_half = surj_residual_half.max(res);
            } else {
                surj_residual = surj_residual.max(res);
            }
            norms[slot] = m.norm(&x);
        }
        surj_norm_ratio = surj_norm_ratio.max(norms[1] / norms[0]);
    }

    // (iv) kernel of the N x (N + 1) truncation of L - omega
    let w = model.weights();
    let ratios: Vec<f64> = (0..n).map(|k| w.beta(k) / w.beta(k + 1)).collect();
    let scale = ratios.iter().fold(omega.norm(), |m, r| m.max(*r));
    let wide = Bidiagonal::tall(vec![omega.norm(); n], ratios);
    let small = linalg::count_singular_values_below(&wide, 1e-8 * scale);
    // (N + 1) columns minus rank N - small, per fiber
    let kernel_dim = (1 + small) * d;

    Ok(CdSample {
        indicator_decay,
        surj_residual,
        surj_residual_half,
        surj_norm_ratio,
        kernel_dim,
    })
}

/// Cowen-Douglas conditions for `L` at the sampled `omega`.
pub fn cd_check(model: &SpaceModel, omegas: &[Complex64], expected_n: usize) -> Result<CheckReport> {
    let r_l = model.weights().left_spectral_radius();
    if omegas.is_empty() {
        return Err(Error::InvalidParameter("no omega samples".into()));
    }
    if let Some(bad) = omegas
        .iter()
        .find(|w| w.norm() < CD_MARGIN * r_l || w.norm() > (1.0 - CD_MARGIN) * r_l)
    {
        return Err(Error::Precondition(format!(
            "omega = {bad} must keep a margin {CD_MARGIN} from 0 and from the circle of radius {r_l}"
        )));
    }
    let n = model.trunc_len();
    if n < 4 * spectra::MIN_EFFECTIVE_TRUNCATION {
        return Err(Error::TruncationTooSmall {
            given: n,
            min: 4 * spectra::MIN_EFFECTIVE_TRUNCATION,
        });
    }
    let half = model.with_truncation(n / 2)?;
    let samples = omegas
        .par_iter()
        .map(|w| cd_sample(model, &half, n / 4, *w))
        .collect::<Result<Vec<_>>>()?;

    let mut report = CheckReport::new("cowen_douglas");
    model_provenance(&mut report, model);
    report.provenance("omega_count", json!(omegas.len()));
    report.provenance("expected_n", json!(expected_n));

    let max = |f: &dyn Fn(&CdSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    report.push(
        "(i) L indicator decay sigma(N)/sigma(N/4)",
        max(&|s| s.indicator_decay),
        1e-3,
        Relation::AtMost,
    );
    report.push("(ii) surjectivity residual at N", max(&|s| s.surj_residual), 1e-4, Relation::AtMost);
    report.push(
        "(ii) residual growth under refinement",
        max(&|s| s.surj_residual - s.surj_residual_half),
        0.0,
        Relation::AtMost,
    );
    report.push(
        "(ii) solution norm ratio ||x_N|| / ||x_N/2||",
        max(&|s| s.surj_norm_ratio),
        1.05,
        Relation::AtMost,
    );

    // (iii) kernel vectors k_omega e_j span the degree-<=K polynomials
    let d = model.fiber_dim();
    let k = omegas.len().min(n / 2).min(10) - 1;
    let rows = (k + 1) * d;
    let w = model.weights();
    let mut cols: Vec<DVector<Complex64>> = Vec::new();
    for omega in omegas {
        for j in 0..d {
            let mut v = DVector::zeros(rows);
            let mut p = Complex64::ONE;
            for deg in 0..=k {
                v[deg * d + j] = p * w.beta(deg);
                p *= omega;
            }
            cols.push(v);
        }
    }
    let q = linalg::range_basis(&DMatrix::from_columns(&cols), 1e-12);
    let worst = (0..rows)
        .map(|t| {
            let mut target = DVector::zeros(rows);
            target[t] = Complex64::ONE;
            linalg::distance_to_span(&q, &target)
        })
        .fold(0.0, f64::max);
    report.provenance("density_degree", json!(k));
    report.push("(iii) distance of monomials to kernel span", worst, 1e-8, Relation::AtMost);

    let dims: Vec<f64> = samples.iter().map(|s| s.kernel_dim as f64).collect();
    let mismatch = dims.iter().map(|x| (x - expected_n as f64).abs()).fold(0.0, f64::max);
    let spread = dims.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - dims.iter().cloned().fold(f64::INFINITY, f64::min);
    report.push("(iv) max |dim ker(L - omega) - n|", mismatch, 0.0, Relation::Equal);
    report.push("(iv) spread of dim ker(L - omega)", spread, 0.0, Relation::Equal);
    report.sequence("kernel_dim", dims);
    report.sequence("indicator_decay", samples.iter().map(|s| s.indicator_decay).collect());
    Ok(report)
}

/// Suite default: `count` points with `0.05 <= |omega| / r(L) <= 0.95`.
pub fn omega_samples(model: &SpaceModel, count: usize, seed: u64) -> Vec<Complex64> {
    let r = model.weights().left_spectral_radius();
    let mut rng = probes::rng(seed ^ 0x0c0d);
    (0..count)
        .map(|_| probes::annulus_point(&mut rng, CD_MARGIN * r, (1.0 - CD_MARGIN) * r))
        .collect()
}

/// `p_n = -sum_{k <= n} lambda^{-k-1} M_z^k h`.
pub fn approximant(model: &SpaceModel, h: &[Complex64], lambda: Complex64, n: usize) -> Result<CoeffFunction> {
    let mut p = CoeffFunction::zero(model.fiber_dim(), model.trunc_len() + 1);
    let mut term = model.conform(&CoeffFunction::constant(h))?;
    let mut coef = -lambda.inv();
    for _ in 0..=n {
        p = p.add_scaled(coef, &term)?;
        term = model.apply_mz(&term)?;
        coef *= lambda.inv();
    }
    Ok(p)
}

/// One row of the polynomial approximation estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApproximantRow {
    pub n: usize,
    /// `||p_n - (M_z - lambda)^{-1} h||` on stored coefficients (a lower
    /// bound for the true distance).
    pub measured: f64,
    /// `measured + tail`, an upper bound for the true distance.
    pub measured_upper: f64,
    /// `||(M_z - lambda)^{-1} h||` including its tail (an upper bound).
    pub resolvent_norm: f64,
}

/// Distances between the polynomials `p_n` and `(M_z - lambda)^{-1} h`.
pub fn approximant_rows(model: &SpaceModel, h: &[Complex64], lambda: Complex64, n_max: usize) -> Result<Vec<ApproximantRow>> {
    let v = eigenvector_at(model, lambda, h)?;
    let resolvent_norm = model.norm(&v) + v.tail_bound();
    (0..=n_max)
        .map(|n| {
            let p = approximant(model, h, lambda, n)?;
            let measured = model.norm(&p.sub(&v.clone().with_tail_bound(0.0))?);
            Ok(ApproximantRow {
                n,
                measured,
                measured_upper: measured + v.tail_bound(),
                resolvent_norm,
            })
        })
        .collect()
}

/// Density of polynomials and of resolvent vectors of kernel elements.
///
/// (a) compares `||p_n - (M_z - lambda)^{-1} h||` with
/// `|lambda|^{-n-1} ||M_z||^{n+1} ||(M_z - lambda)^{-1} h||`, which follows
/// from `p_n - (M_z - lambda)^{-1} h = -lambda^{-n-1} M_z^{n+1} (M_z - lambda)^{-1} h`;
/// (b) recovers `z^k h`, `k <= K`, from resolvent vectors truncated to degree
/// `K`; (c) checks `f = M_z^n L^n f + sum_{k<n} M_z^k (I - M_z L) L^k f`.
pub fn density_check(
    model: &SpaceModel,
    kernel_basis: &[Vec<Complex64>],
    lambdas: &[Complex64],
    k: usize,
    sampling: Sampling,
) -> Result<CheckReport> {
    let mz = model.weights().mz_norm();
    if let Some(bad) = lambdas.iter().find(|l| l.norm() <= mz) {
        return Err(Error::Precondition(format!(
            "|lambda| = {} must exceed ||M_z|| = {mz}",
            bad.norm()
        )));
    }
    if kernel_basis.is_empty() || lambdas.is_empty() {
        return Err(Error::InvalidParameter("kernel basis and lambda samples must be nonempty".into()));
    }
    let mut report = CheckReport::new("density");
    model_provenance(&mut report, model);
    report.provenance("K", json!(k));
    report.provenance("lambdas", Value::Array(lambdas.iter().map(|l| c64(*l)).collect()));
    report.provenance("seed", json!(sampling.seed));
    report.provenance("probe_count", json!(sampling.probe_count));

    // (a)
    let mut worst: f64 = 0.0;
    for h in kernel_basis {
        for lam in lambdas {
            let rows = approximant_rows(model, h, *lam, k)?;
            let mut ratios = Vec::new();
            for r in &rows {
                let bound = (mz / lam.norm()).powi(r.n as i32 + 1) * r.resolvent_norm;
                ratios.push(r.measured_upper / bound);
                worst = worst.max(r.measured_upper / bound);
            }
            if report.sequences.is_empty() {
                report.sequence("(a) measured/bound", ratios);
            }
        }
    }
    report.push("(a) max ||p_n - v|| / (|lambda|^-(n+1) ||M_z||^(n+1) ||v||)", worst, 1.0 + 1e-12, Relation::AtMost);

    // (b)
    let d = model.fiber_dim();
    let rows = (k + 1) * d;
    let w = model.weights();
    let mut cols: Vec<DVector<Complex64>> = Vec::new();
    for h in kernel_basis {
        for lam in lambdas {
            let v = eigenvector_at(model, *lam, h)?;
            let x = model.coords(&v)?;
            cols.push(DVector::from_column_slice(&x[..rows]));
        }
    }
    let q = linalg::range_basis(&DMatrix::from_columns(&cols), 1e-12);
    let mut worst: f64 = 0.0;
    for h in kernel_basis {
        let hn = linalg::vec_norm(h);
        for deg in 0..=k {
            let mut t = DVector::zeros(rows);
            for j in 0..d {
                t[deg * d + j] = h[j] * w.beta(deg) / hn;
            }
            worst = worst.max(linalg::distance_to_span(&q, &t) / t.norm());
        }
    }
    report.push("(b) distance of z^k h to resolvent span", worst, 1e-8, Relation::AtMost);

    // (c)
    let probes = probes::random_probes(model, sampling.probe_count, sampling.seed);
    let n = model.trunc_len();
    let mut worst: f64 = 0.0;
    for f in &probes {
        for steps in [1, k.clamp(1, n), n / 2] {
            worst = worst.max(telescoping_residual(model, f, steps)? / model.norm(f));
        }
    }
    report.push("(c) telescoping residual / ||f||", worst, 0.0, Relation::AtMost);
    Ok(report)
}

/// `||f - M_z^n L^n f - sum_{k<n} M_z^k (I - M_z L) L^k f||`.
pub fn telescoping_residual(model: &SpaceModel, f: &CoeffFunction, n: usize) -> Result<f64> {
    let f = model.conform(f)?;
    let mut lk = f.clone();
    let mut sum = CoeffFunction::zero(model.fiber_dim(), model.trunc_len() + 1);
    for k in 0..n {
        let hk = lk.sub(&model.apply_mz(&model.apply_l(&lk)?)?)?;
        sum = sum.add_scaled(Complex64::ONE, &shift_up(model, &hk, k))?;
        lk = model.apply_l(&lk)?;
    }
    sum = sum.add_scaled(Complex64::ONE, &shift_up(model, &lk, n))?;
    Ok(model.norm(&f.sub(&sum)?))
}

/// Flat probe: equal coordinates in the orthonormal basis, unit norm.
pub fn flat_probe(model: &SpaceModel) -> CoeffFunction {
    let c = Complex64::new(1.0 / (model.dim() as f64).sqrt(), 0.0);
    model.from_coords(&vec![c; model.dim()], 0.0)
}

/// Per-lambda outcome of [`decompose_solvability_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolvabilityRow {
    pub lambda: Complex64,
    pub interior: bool,
    pub solvable: bool,
    pub witnessed: bool,
    pub neumann_diverged: bool,
    /// `sigma_min(I - lambda L)` at `N/4, N/2, N`.
    pub indicators: Vec<f64>,
}

fn identity_minus_l(model: &SpaceModel, lambda: Complex64, n_eff: usize) -> f64 {
    let w = model.weights();
    let off = (0..n_eff - 1).map(|k| lambda.norm() * w.beta(k) / w.beta(k + 1)).collect();
    Bidiagonal::upper(vec![1.0; n_eff], off).smallest_singular_value()
}

/// Inside the disc `f = (M_z - lambda) g + h` is solvable and `I - lambda L`
/// stays invertible under refinement; outside, the Neumann series diverges and
/// an eigenvector certifies `1/lambda in sigma(L)`. Passes when every sample
/// falls on exactly the side its location predicts.
pub fn decompose_solvability_check(model: &SpaceModel, grid: &[Complex64], sampling: Sampling) -> Result<CheckReport> {
    let radius = model.evaluation_radius();
    if let Some(bad) = grid.iter().find(|l| (0.95 * radius..=1.05 * radius).contains(&l.norm())) {
        return Err(Error::Precondition(format!(
            "lambda = {bad} lies in the excluded band 0.95 <= |lambda| / {radius} <= 1.05"
        )));
    }
    let n = model.trunc_len();
    let levels: Vec<usize> = [n / 4, n / 2, n]
        .into_iter()
        .filter(|k| *k >= spectra::MIN_EFFECTIVE_TRUNCATION)
        .collect();
    let probes = probes::random_probes(model, sampling.probe_count.min(4), sampling.seed);
    let flat = flat_probe(model);
    let e = unit_vector(model.fiber_dim(), 0);

    let rows: Vec<SolvabilityRow> = grid
        .par_iter()
        .map(|&lambda| {
            let indicators: Vec<f64> = levels.iter().map(|k| identity_minus_l(model, lambda, *k)).collect();
            let first = indicators[0];
            let last = *indicators.last().unwrap();
            let stable = last > 1e-6 && last >= 0.5 * first;
            let decomposes = probes.iter().all(|f| decompose(model, f, lambda).is_ok());
            let neumann_diverged = matches!(neumann_series(model, &flat, lambda), Err(Error::OutsideDomain { .. }));
            let witnessed = spectra::reciprocal_witness(model, lambda, &e)
                .map(|w| w.passed)
                .unwrap_or(false);
            SolvabilityRow {
                lambda,
                interior: lambda.norm() < radius,
                solvable: decomposes && stable,
                witnessed,
                neumann_diverged,
                indicators,
            }
        })
        .collect();

    let mut report = CheckReport::new("decompose_solvability");
    model_provenance(&mut report, model);
    report.provenance("seed", json!(sampling.seed));
    report.provenance("grid", Value::Array(grid.iter().map(|l| c64(*l)).collect()));
    let both = rows.iter().filter(|r| r.solvable && r.witnessed).count();
    let interior_bad = rows.iter().filter(|r| r.interior && !(r.solvable && !r.witnessed)).count();
    let exterior_bad = rows
        .iter()
        .filter(|r| !r.interior && !(r.neumann_diverged && r.witnessed && !r.solvable))
        .count();
    report.push("samples both solvable and witnessed", both as f64, 0.0, Relation::Equal);
    report.push("interior samples not solvable", interior_bad as f64, 0.0, Relation::Equal);
    report.push("exterior samples without divergence and witness", exterior_bad as f64, 0.0, Relation::Equal);
    report.sequence(
        "min indicator",
        rows.iter().map(|r| r.indicators.iter().cloned().fold(f64::INFINITY, f64::min)).collect(),
    );
    Ok(report)
}

/// Result of [`boundary_blowup_diagnostic`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupFit {
    pub growth_exponent: f64,
    /// `-log |lambda_k - xi|`.
    pub x: Vec<f64>,
    /// `log ||R_{lambda_k} f||`.
    pub y: Vec<f64>,
}

/// `lambda_k = xi (1 + 2^{-k})` for `k` in the given range.
pub fn dyadic_ray(xi: Complex64, ks: std::ops::RangeInclusive<i32>) -> Vec<Complex64> {
    ks.map(|k| xi * (1.0 + 2f64.powi(-k))).collect()
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fits `log ||R_lambda f||` against `-log |lambda - xi|` along a ray. An
/// exponent near 0 means the resolvent stays bounded near `xi`; an exponent
/// near `p > 0` indicates a pole of order `p`.
pub fn boundary_blowup_diagnostic(
    model: &SpaceModel,
    sub: &InvariantSubspace,
    f: &CoeffFunction,
    xi: Complex64,
    ray: &[Complex64],
) -> Result<(BlowupFit, CheckReport)> {
    let member = membership_test(model, sub, f)?;
    if !member.is_member {
        return Err(Error::NotInSubspace {
            residual: member.residual,
        });
    }
    if ray.len() < 2 {
        return Err(Error::InvalidParameter("the ray needs at least two points".into()));
    }
    let mut x = Vec::with_capacity(ray.len());
    let mut y = Vec::with_capacity(ray.len());
    for lam in ray {
        let dist = (lam - xi).norm();
        if dist == 0.0 {
            return Err(Error::InvalidParameter("ray point coincides with the target".into()));
        }
        let g = sub.resolvent(model, f, *lam)?.g;
        x.push(-dist.ln());
        y.push(model.norm(&g).ln());
    }
    let growth_exponent = least_squares_slope(&x, &y);
    let mut report = CheckReport::new("boundary_blowup");
    model_provenance(&mut report, model);
    report.provenance("xi", c64(xi));
    report.provenance("ray", Value::Array(ray.iter().map(|l| c64(*l)).collect()));
    report.provenance("subspace_dim", json!(sub.dim()));
    report.push("ray points", ray.len() as f64, 2.0, Relation::AtLeast);
    report.push("membership residual of f", member.residual, member.threshold, Relation::AtMost);
    report.sequence("x", x.clone());
    report.sequence("y", y.clone());
    Ok((
        BlowupFit {
            growth_exponent,
            x,
            y,
        },
        report,
    ))
}

/// Named checks of the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Axioms,
    Sot,
    CowenDouglas,
    Density,
    Solvability,
    Blowup,
    Reciprocal,
}

impl Suite {
    pub const NAMES: [&'static str; 8] = ["all", "axioms", "sot", "cd", "density", "solvability", "blowup", "reciprocal"];

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "all" => Suite::All,
            "axioms" => Suite::Axioms,
            "sot" => Suite::Sot,
            "cd" => Suite::CowenDouglas,
            "density" => Suite::Density,
            "solvability" => Suite::Solvability,
            "blowup" => Suite::Blowup,
            "reciprocal" => Suite::Reciprocal,
            _ => return None,
        })
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

/// Tolerance on the fitted exponents of the suite's blow-up cases.
pub const BLOWUP_TOLERANCE: f64 = 0.05;

fn blowup_case(model: &SpaceModel, name: &str, a: &[f64], f_index: usize, xi: Complex64, expected: f64) -> CheckReport {
    let run = || -> Result<CheckReport> {
        let gens = a.iter().map(|x| model.szego(*x)).collect::<Result<Vec<_>>>()?;
        let sub = build_subspace(model, &gens, BuildMode::ExactSpan)?;
        let ray = dyadic_ray(xi, 4..=15);
        let (fit, mut report) = boundary_blowup_diagnostic(model, &sub, &gens[f_index], xi, &ray)?;
        report.name = name.to_string();
        report.provenance("generators", json!(a));
        report.push(
            format!("|growth exponent - {expected}|"),
            (fit.growth_exponent - expected).abs(),
            BLOWUP_TOLERANCE,
            Relation::AtMost,
        );
        Ok(report)
    };
    run().unwrap_or_else(|e| CheckReport::failed(name, &e))
}

/// Runs the selected checks with the suite's default samples. Reports come
/// back in a fixed order.
pub fn run_suite(model: &SpaceModel, suite: Suite, sampling: Sampling) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let radius = model.evaluation_radius();
    let d = model.fiber_dim();
    if suite.includes(Suite::Axioms) {
        out.push(model_axioms_check(model, sampling));
    }
    if suite.includes(Suite::Sot) {
        let probes = sot_probes(model, sampling);
        out.push(sot_decay_check(model, &probes, model.trunc_len()).unwrap_or_else(|e| CheckReport::failed("sot_decay", &e)));
    }
    if suite.includes(Suite::CowenDouglas) {
        let omegas = omega_samples(model, 50, sampling.seed);
        out.push(cd_check(model, &omegas, d).unwrap_or_else(|e| CheckReport::failed("cowen_douglas", &e)));
    }
    if suite.includes(Suite::Density) {
        let kernel: Vec<Vec<Complex64>> = (0..d).map(|j| unit_vector(d, j)).collect();
        let base = model.weights().mz_norm();
        let lambdas: Vec<Complex64> = (0..8)
            .map(|i| Complex64::from_polar(base * (1.5 + 1.5 * i as f64 / 7.0), 0.7 + 0.8 * i as f64))
            .collect();
        out.push(density_check(model, &kernel, &lambdas, 7, sampling).unwrap_or_else(|e| CheckReport::failed("density", &e)));
    }
    if suite.includes(Suite::Solvability) {
        let grid: Vec<Complex64> = [
            (0.0, 0.0),
            (0.5, 0.0),
            (-0.3, 0.4),
            (0.0, -0.9),
            (1.5, 0.0),
            (2.0, 0.0),
            (0.0, -1.2),
            (3.0, 1.0),
        ]
        .iter()
        .map(|(re, im)| Complex64::new(*re, *im) * radius)
        .collect();
        out.push(
            decompose_solvability_check(model, &grid, sampling)
                .unwrap_or_else(|e| CheckReport::failed("decompose_solvability", &e)),
        );
    }
    if suite.includes(Suite::Blowup)
        && d == 1 {
            out.push(blowup_case(model, "boundary_blowup_pole", &[0.9], 0, Complex64::new(1.0 / 0.9, 0.0), 1.0));
            out.push(blowup_case(model, "boundary_blowup_analytic", &[0.5], 0, Complex64::new(1.2, 0.0), 0.0));
            out.push(blowup_case(
                model,
                "boundary_blowup_decoupled",
                &[0.3, 0.6],
                0,
                Complex64::new(1.0 / 0.6, 0.0),
                0.0,
            ));
        }
    if suite.includes(Suite::Reciprocal) {
        let lambdas: Vec<Complex64> = [(2.0, 0.0), (1.5, 0.0), (10.0, 0.0), (0.0, 2.0)]
            .iter()
            .map(|(re, im)| Complex64::new(*re, *im) * radius)
            .collect();
        let report = match spectra::reciprocal_spectrum_check(model, &lambdas) {
            Ok(entries) => {
                let mut r = CheckReport::new("reciprocal_spectrum");
                model_provenance(&mut r, model);
                r.provenance("lambdas", Value::Array(lambdas.iter().map(|l| c64(*l)).collect()));
                let failed = entries.iter().filter(|e| !e.passed).count();
                let worst = entries
                    .iter()
                    .map(|e| e.witness_residual / e.residual_bound.max(f64::MIN_POSITIVE))
                    .fold(0.0, f64::max);
                r.push("failed samples", failed as f64, 0.0, Relation::Equal);
                r.push("max witness residual / bound", worst, 1.0, Relation::AtMost);
                r.sequence("witness_residual", entries.iter().map(|e| e.witness_residual).collect());
                r
            }
            Err(e) => CheckReport::failed("reciprocal_spectrum", &e),
        };
        out.push(report);
    }
    out
}
