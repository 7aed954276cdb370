//! Seeded random probes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coeffspace::{CoeffFunction, SpaceModel};

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_PROBE_COUNT: usize = 32;

pub type ProbeRng = ChaCha8Rng;

pub fn rng(seed: u64) -> ProbeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Random polynomial of the given degree with i.i.d. complex Gaussian
/// coordinates in the orthonormal basis `z^n e_j / beta_n`, scaled to unit
/// norm.
pub fn random_polynomial<R: Rng>(model: &SpaceModel, degree: usize, rng: &mut R) -> CoeffFunction {
    let d = model.fiber_dim();
    let degree = degree.min(model.trunc_len());
    let mut x = vec![Complex64::ZERO; model.dim()];
    for c in x.iter_mut().take((degree + 1) * d) {
        *c = complex_gaussian(rng);
    }
    let norm = crate::linalg::vec_norm(&x);
    x.iter_mut().for_each(|c| *c /= norm);
    model.from_coords(&x, 0.0)
}

/// `count` unit-norm polynomials of degree `N - 1`, so that `M_z` acts on
/// them without truncation.
pub fn random_probes(model: &SpaceModel, count: usize, seed: u64) -> Vec<CoeffFunction> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| random_polynomial(model, model.trunc_len() - 1, &mut rng))
        .collect()
}

/// Point uniformly distributed (by area) in the annulus `r_min <= |z| <= r_max`.
pub fn annulus_point<R: Rng>(rng: &mut R, r_min: f64, r_max: f64) -> Complex64 {
    let u: f64 = rng.random();
    let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
    let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(r, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspace::{make_space, WeightKind};

    #[test]
    fn probes_are_reproducible_and_normalized() {
        let m = make_space(WeightKind::Bergman, 2, 32, 1e-10).unwrap();
        let a = random_probes(&m, 4, 7);
        let b = random_probes(&m, 4, 7);
        assert_eq!(a, b);
        for f in &a {
            assert!((m.norm(f) - 1.0).abs() < 1e-13);
            assert_eq!(f.degree(), Some(31));
        }
        assert_ne!(random_probes(&m, 1, 8)[0], a[0]);
    }

    #[test]
    fn annulus_points_stay_in_range() {
        let mut r = rng(1);
        for _ in 0..200 {
            let z = annulus_point(&mut r, 0.05, 0.95);
            assert!(z.norm() >= 0.05 - 1e-15 && z.norm() <= 0.95 + 1e-15);
        }
    }
}
