//! Acceptance criteria. Runs without the libtest harness: every criterion
//! prints one `PASS`/`FAIL` line and the process fails if any criterion does.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use shiftlab::checks::{
    boundary_blowup_diagnostic, cd_check, dyadic_ray, omega_samples, approximant_rows, sot_decay_check, sot_probes, Sampling,
};
use shiftlab::probes::{annulus_point, random_polynomial, rng};
use shiftlab::resolvent::continue_f;
use shiftlab::spectra::reciprocal_witness;
use shiftlab::subspaces::{build_subspace, point_spectrum_restriction, BuildMode};
use shiftlab::{make_space, CoeffFunction, Error, SpaceModel, WeightKind};

const SEED: u64 = 7;
const INTERIOR_REL_TOL: f64 = 1e-8;
const INTERIOR_RUNTIME: Duration = Duration::from_secs(10);
const EXTERIOR_TOL: f64 = 1e-10;
const IDENTITY_REL_TOL: f64 = 1e-8;
const RECIPROCAL_TAIL_MAX: f64 = 1e-10;
const CD_OMEGAS: usize = 50;
const BLOWUP_TOL: f64 = 0.05;

fn verdict(criterion: u32, name: &str, passed: bool, detail: String) -> bool {
    println!("criterion {criterion} [{name}]: {} {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn hardy() -> SpaceModel {
    make_space(WeightKind::Hardy, 1, 256, 1e-10).unwrap()
}

fn unit(x: f64) -> Vec<Complex64> {
    vec![Complex64::new(x, 0.0)]
}

/// 50 random polynomials of mixed degree and 50 kernels `k_a`, `|a| <= 0.9`.
fn interior_probes(model: &SpaceModel) -> Vec<CoeffFunction> {
    let mut r = rng(SEED);
    let mut out = Vec::new();
    for i in 0..50 {
        let degree = [3, 17, 64, 255][i % 4];
        out.push(random_polynomial(model, degree, &mut r));
    }
    for _ in 0..50 {
        let a = annulus_point(&mut r, 0.0, 0.9);
        out.push(model.szego_kernel(a, &unit(1.0)).unwrap());
    }
    out
}

fn interior_lambdas() -> Vec<Complex64> {
    let mut r = rng(SEED + 1);
    (0..100).map(|_| annulus_point(&mut r, 0.0, 0.9)).collect()
}

fn criterion_1_interior_consistency() -> bool {
    let model = hardy();
    let probes = interior_probes(&model);
    let lambdas = interior_lambdas();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for f in &probes {
        let scale = model.norm(f);
        for &l in &lambdas {
            let c = continue_f(&model, f, l, None).unwrap();
            let e = model.evaluate(f, l).unwrap();
            let rel = (c.value[0] - e.value[0]).norm() / scale.max(e.value[0].norm());
            worst = worst.max(rel);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "interior consistency",
        worst <= INTERIOR_REL_TOL && elapsed < INTERIOR_RUNTIME,
        format!("max relative error {worst:.2e} <= {INTERIOR_REL_TOL:e}, {} pairs in {elapsed:.2?}", probes.len() * lambdas.len()),
    )
}

fn criterion_2_exterior_continuation() -> bool {
    let model = hardy();
    let k = model.szego(0.5).unwrap();
    let sub = build_subspace(&model, std::slice::from_ref(&k), BuildMode::ExactSpan).unwrap();
    let v = continue_f(&model, &k, Complex64::new(1.6, 0.0), Some(&sub)).unwrap().value[0];
    let err = (v - Complex64::new(5.0, 0.0)).norm();
    let hit = continue_f(&model, &k, Complex64::new(2.0, 0.0), Some(&sub));
    let refused = matches!(hit, Err(Error::SpectrumHit { .. }));
    verdict(
        2,
        "exterior continuation",
        err <= EXTERIOR_TOL && refused,
        format!("value at 1.6 = {v:.12} (error {err:.1e}); lambda = 2 raised spectrum hit: {refused}"),
    )
}

fn criterion_3_defining_identity() -> bool {
    let model = hardy();
    let probes = interior_probes(&model);
    let lambdas = interior_lambdas();
    let mut worst: f64 = 0.0;
    for f in &probes {
        let norm = model.norm(f);
        for &l in &lambdas {
            let c = continue_f(&model, f, l, None).unwrap();
            worst = worst.max(c.residual / norm);
        }
    }
    verdict(
        3,
        "defining identity",
        worst <= IDENTITY_REL_TOL,
        format!("max ||(M_z - l) R f - M_z f + l c|| / ||f|| = {worst:.2e} <= {IDENTITY_REL_TOL:e}"),
    )
}

fn criterion_4_point_spectrum_equivalence() -> bool {
    let model = hardy();
    let mut r = rng(SEED + 2);
    let mut cases = 0;
    let mut agree = 0;
    let mut positives = 0;
    for trial in 0..12 {
        let dim = 1 + trial % 4;
        let mut a: Vec<Complex64> = Vec::new();
        while a.len() < dim {
            let c = annulus_point(&mut r, 0.0, 0.9);
            if a.iter().all(|b| (b - c).norm() > 0.15) {
                a.push(c);
            }
        }
        let gens: Vec<_> = a.iter().map(|&c| model.szego_kernel(c, &unit(1.0)).unwrap()).collect();
        let sub = build_subspace(&model, &gens, BuildMode::ExactSpan).unwrap();
        for i in 0..50 {
            // every fifth sample sits on a reciprocal eigenvalue
            let lambda = if i % 5 == 0 {
                a[(i / 5) % dim].inv()
            } else {
                annulus_point(&mut r, 1.1, 6.0)
            };
            let v = point_spectrum_restriction(&model, &sub, lambda, &[unit(1.0)]).unwrap();
            cases += 1;
            agree += usize::from(v.agree());
            positives += usize::from(v.by_membership && v.by_eigenvalue);
        }
    }
    verdict(
        4,
        "membership vs restriction eigenvalue",
        agree == cases && positives > 0,
        format!("{agree}/{cases} agree ({positives} eigenvalue cases)"),
    )
}

fn criterion_5_polynomial_approximation_literal_constant() -> bool {
    let model = hardy();
    let lambda = Complex64::new(2.0, 0.0);
    let mz = model.weights().mz_norm();
    let rows = approximant_rows(&model, &unit(1.0), lambda, 12).unwrap();
    let mut worst_ratio: f64 = 0.0;
    let mut violations = Vec::new();
    for row in &rows {
        let n = row.n as i32;
        let literal = lambda.norm().powi(-n - 2) * mz.powi(n + 1) * row.resolvent_norm;
        let ratio = row.measured / literal;
        worst_ratio = worst_ratio.max(ratio);
        if row.measured > literal {
            violations.push(row.n);
        }
    }
    verdict(
        5,
        "polynomial approximation, literal constant",
        violations.is_empty(),
        format!("max measured / bound = {worst_ratio:.6}; violated at n = {violations:?}"),
    )
}

fn criterion_6_reciprocal_eigenvectors() -> bool {
    let model = hardy();
    let samples = [
        Complex64::new(2.0, 0.0),
        Complex64::new(1.5, 0.0),
        Complex64::new(10.0, 0.0),
        Complex64::new(0.0, 2.0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for l in samples {
        let e = reciprocal_witness(&model, l, &unit(1.0)).unwrap();
        let pass = e.witness_residual <= e.tail_bound && e.tail_bound <= RECIPROCAL_TAIL_MAX && e.passed;
        ok &= pass;
        parts.push(format!("{l}: {:.1e}<={:.1e}", e.witness_residual, e.tail_bound));
    }
    verdict(6, "reciprocal eigenvalues of L", ok, parts.join(", "))
}

fn criterion_7_cowen_douglas() -> bool {
    let sampling = Sampling::default();
    let mut failures = Vec::new();
    let mut runs = 0;
    for kind in [WeightKind::Hardy, WeightKind::Bergman, WeightKind::Dirichlet] {
        for d in [1, 2] {
            let model = make_space(kind, d, 256, 1e-10).unwrap();
            let omegas = omega_samples(&model, CD_OMEGAS, sampling.seed);
            let cd = cd_check(&model, &omegas, d).unwrap();
            let sot = sot_decay_check(&model, &sot_probes(&model, sampling), model.trunc_len()).unwrap();
            runs += 1;
            for r in [&cd, &sot] {
                for msg in r.failures() {
                    failures.push(format!("{} d={d} {}: {msg}", kind.name(), r.name));
                }
            }
        }
    }
    verdict(
        7,
        "Cowen-Douglas and strong decay",
        failures.is_empty(),
        format!("{runs} presets x {CD_OMEGAS} omegas; failures {failures:?}"),
    )
}

fn criterion_8_boundary_blowup() -> bool {
    let model = hardy();
    let k9 = model.szego(0.9).unwrap();
    let sub9 = build_subspace(&model, std::slice::from_ref(&k9), BuildMode::ExactSpan).unwrap();
    let xi = Complex64::new(1.0 / 0.9, 0.0);
    let ray = dyadic_ray(xi, 4..=15);
    let (pole, _) = boundary_blowup_diagnostic(&model, &sub9, &k9, xi, &ray).unwrap();

    let k5 = model.szego(0.5).unwrap();
    let sub5 = build_subspace(&model, std::slice::from_ref(&k5), BuildMode::ExactSpan).unwrap();
    let xi = Complex64::new(1.2, 0.0);
    let (analytic, _) = boundary_blowup_diagnostic(&model, &sub5, &k5, xi, &dyadic_ray(xi, 4..=15)).unwrap();

    verdict(
        8,
        "boundary blow-up exponent",
        ray.len() == 12
            && (pole.growth_exponent - 1.0).abs() <= BLOWUP_TOL
            && analytic.growth_exponent.abs() <= BLOWUP_TOL,
        format!(
            "pole {:.4} (target 1), analytic {:.4} (target 0), tolerance {BLOWUP_TOL}",
            pole.growth_exponent, analytic.growth_exponent
        ),
    )
}

fn run_check(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(["check", "--suite", "all", "--seed", "11", "--out"])
        .arg(dir.join("report.json"))
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_9_determinism() -> bool {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_check(a.path());
    let second = run_check(b.path());
    verdict(
        9,
        "determinism",
        first == second && first.len() > 1,
        format!("{} files byte-identical: {}", first.len(), first == second),
    )
}

fn main() {
    let criteria: [fn() -> bool; 9] = [
        criterion_1_interior_consistency,
        criterion_2_exterior_continuation,
        criterion_3_defining_identity,
        criterion_4_point_spectrum_equivalence,
        criterion_5_polynomial_approximation_literal_constant,
        criterion_6_reciprocal_eigenvectors,
        criterion_7_cowen_douglas,
        criterion_8_boundary_blowup,
        criterion_9_determinism,
    ];
    let failed = criteria
        .iter()
        .enumerate()
        .filter(|(i, c)| {
            let ok = std::panic::catch_unwind(*c).unwrap_or(false);
            if !ok {
                eprintln!("criterion {} did not pass", i + 1);
            }
            !ok
        })
        .count();
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
