//! Small numerical kernels shared by the operator modules.
//!
//! Truncations of `M_z - lambda`, `L - lambda` and `I - lambda L` are
//! bidiagonal in the orthonormal basis `z^n / beta_n`. Their singular values
//! are those of the Golub-Kahan tridiagonal matrix with zero diagonal, whose
//! eigenvalues are `+-sigma_i` (plus a zero for rectangular shapes). Sturm
//! counts on that matrix give the number of singular values below any
//! threshold in `O(n)`, and bisection on them resolves tiny singular values to
//! high relative accuracy. Phases of the entries never matter: a bidiagonal
//! matrix is unitarily equivalent, by diagonal scalings, to the matrix of its
//! moduli.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Singular values below this are reported as zero.
const SIGMA_FLOOR: f64 = 1e-300;

/// A bidiagonal matrix described by the moduli of its entries.
#[derive(Clone, Debug)]
pub struct Bidiagonal {
    /// Off-diagonal of the Golub-Kahan matrix: `d_1, e_1, d_2, e_2, ...`.
    gk: Vec<f64>,
    /// Number of singular values (the smaller matrix dimension).
    n_sv: usize,
}

impl Bidiagonal {
    /// Square `n x n` upper bidiagonal with `diag.len() = n` and
    /// `off.len() = n - 1`.
    pub fn upper(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty() && off.len() + 1 == diag.len());
        let n = diag.len();
        let mut gk = Vec::with_capacity(2 * n - 1);
        for i in 0..n {
            gk.push(diag[i].abs());
            if i < off.len() {
                gk.push(off[i].abs());
            }
        }
        Self { gk, n_sv: n }
    }

    /// `(n + 1) x n` lower bidiagonal: `diag[i]` at `(i, i)` and `sub[i]` at
    /// `(i + 1, i)`. Its transpose, the `n x (n + 1)` upper bidiagonal, has
    /// the same singular values.
    pub fn tall(diag: Vec<f64>, sub: Vec<f64>) -> Self {
        assert!(!diag.is_empty() && sub.len() == diag.len());
        let gk = diag
            .iter()
            .zip(&sub)
            .flat_map(|(d, e)| [d.abs(), e.abs()])
            .collect();
        Self { gk, n_sv: diag.len() }
    }

    pub fn upper_complex(diag: &[Complex64], off: &[Complex64]) -> Self {
        Self::upper(
            diag.iter().map(|c| c.norm()).collect(),
            off.iter().map(|c| c.norm()).collect(),
        )
    }

    pub fn tall_complex(diag: &[Complex64], sub: &[Complex64]) -> Self {
        Self::tall(
            diag.iter().map(|c| c.norm()).collect(),
            sub.iter().map(|c| c.norm()).collect(),
        )
    }

    pub fn singular_value_count(&self) -> usize {
        self.n_sv
    }

    fn gk_size(&self) -> usize {
        self.gk.len() + 1
    }

    /// Number of singular values strictly below `x > 0`.
    pub fn count_below(&self, x: f64) -> usize {
        debug_assert!(x > 0.0);
        // LDL^T of (T - x I) with T the zero-diagonal GK matrix.
        let pivmin = f64::MIN_POSITIVE;
        let mut negatives = 0usize;
        let mut q = -x;
        if q < 0.0 {
            negatives += 1;
        }
        for b in &self.gk {
            let qq = if q.abs() < pivmin { -pivmin } else { q };
            q = -x - b * b / qq;
            if q < 0.0 || (q == 0.0 && qq > 0.0) {
                negatives += 1;
            }
        }
        // eigenvalues <= 0 other than -sigma_i: one zero for rectangular shapes
        negatives.saturating_sub(self.gk_size() - self.n_sv)
    }

    fn upper_estimate(&self) -> f64 {
        let mut hi: f64 = 0.0;
        for i in 0..self.gk.len() {
            let left = self.gk[i];
            let right = self.gk.get(i + 1).copied().unwrap_or(0.0);
            hi = hi.max(left + right);
        }
        hi.max(self.gk.first().copied().unwrap_or(0.0))
    }

    /// Smallest singular value, by geometric bisection on Sturm counts.
    pub fn smallest_singular_value(&self) -> f64 {
        if self.count_below(SIGMA_FLOOR) >= 1 {
            return 0.0;
        }
        let mut lo = SIGMA_FLOOR;
        let mut hi = self.upper_estimate().max(SIGMA_FLOOR) * 2.0;
        for _ in 0..256 {
            if hi / lo <= 1.0 + 1e-14 {
                break;
            }
            let mid = lo.sqrt() * hi.sqrt();
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo.sqrt() * hi.sqrt()
    }
}

/// Number of singular values of `b` below `x`, treating `x <= 0` as none.
pub fn count_singular_values_below(b: &Bidiagonal, x: f64) -> usize {
    if x <= 0.0 {
        0
    } else {
        b.count_below(x)
    }
}

/// Smallest singular value of a dense matrix. For wide matrices this is the
/// `min(rows, cols)`-th singular value.
pub fn dense_smallest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().fold(f64::INFINITY, |a, b| a.min(*b))
}

/// Eigenvalues of a square complex matrix, from its complex Schur form.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    assert!(m.is_square());
    if m.nrows() == 0 {
        return Vec::new();
    }
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Orthonormal basis of the numerical range of `m`: left singular vectors whose
/// singular value exceeds `rel_cut * sigma_max`.
pub fn range_basis(m: &DMatrix<Complex64>, rel_cut: f64) -> DMatrix<Complex64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, b| a.max(*b));
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > rel_cut * smax && **s > 0.0)
        .map(|(i, _)| i)
        .collect();
    DMatrix::from_fn(u.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Euclidean distance from `t` to the span of the orthonormal columns of `q`.
pub fn distance_to_span(q: &DMatrix<Complex64>, t: &DVector<Complex64>) -> f64 {
    if q.ncols() == 0 {
        return t.norm();
    }
    let coeffs = q.ad_mul(t);
    (t - q * coeffs).norm()
}

/// Condition number of a Hermitian positive semidefinite matrix (infinite when
/// singular).
pub fn hermitian_condition(g: &DMatrix<Complex64>) -> f64 {
    let eig = g.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
    let min = eig.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Euclidean norm of a complex slice.
pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_upper(diag: &[f64], off: &[f64]) -> DMatrix<Complex64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(diag[r], 0.0)
            } else if c == r + 1 {
                Complex64::new(off[r], 0.0)
            } else {
                Complex64::ZERO
            }
        })
    }

    fn dense_tall(diag: &[f64], sub: &[f64]) -> DMatrix<Complex64> {
        let n = diag.len();
        DMatrix::from_fn(n + 1, n, |r, c| {
            if r == c {
                Complex64::new(diag[c], 0.0)
            } else if r == c + 1 {
                Complex64::new(sub[c], 0.0)
            } else {
                Complex64::ZERO
            }
        })
    }

    #[test]
    fn shift_matrices() {
        // isometric shift: all singular values 1
        let b = Bidiagonal::tall(vec![0.0; 10], vec![1.0; 10]);
        assert!((b.smallest_singular_value() - 1.0).abs() < 1e-13);
        // square shift has a kernel
        let b = Bidiagonal::upper(vec![0.0; 10], vec![1.0; 9]);
        assert_eq!(b.smallest_singular_value(), 0.0);
        assert_eq!(b.count_below(0.5), 1);
    }

    #[test]
    fn tiny_singular_values_are_resolved_relatively() {
        // upper bidiagonal with diag 1/2 and super 1: sigma_min ~ 2^-n
        let n = 60;
        let b = Bidiagonal::upper(vec![0.5; n], vec![1.0; n - 1]);
        let s = b.smallest_singular_value();
        // the inverse has first row entries 2 * 2^k (|.|), so
        // 1/sigma_min = ||A^{-1}|| lies between that row's norm and
        // sqrt(n) times it
        let row: f64 = (0..n).map(|k| (2.0f64 * 2f64.powi(k as i32)).powi(2)).sum::<f64>().sqrt();
        assert!(s <= 1.0 / row * (1.0 + 1e-10));
        assert!(s >= 1.0 / (row * (n as f64).sqrt()));
    }

    #[test]
    fn schur_eigenvalues_of_triangular_matrix() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.3, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::ZERO,
                Complex64::new(-0.6, 0.0),
            ],
        );
        let mut e: Vec<f64> = eigenvalues(&m).iter().map(|z| z.re).collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((e[0] + 0.6).abs() < 1e-14 && (e[1] - 0.3).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sturm_bisection_matches_dense_svd_square(
            diag in proptest::collection::vec(-2.0f64..2.0, 2..24),
            seed in proptest::collection::vec(0.05f64..2.0, 24),
        ) {
            let off: Vec<f64> = seed[..diag.len() - 1].to_vec();
            let b = Bidiagonal::upper(diag.clone(), off.clone());
            let dense = dense_smallest_singular_value(&dense_upper(&diag, &off));
            let fast = b.smallest_singular_value();
            prop_assert!((fast - dense).abs() <= 1e-12 * (1.0 + dense), "{} vs {}", fast, dense);
        }

        #[test]
        fn sturm_bisection_matches_dense_svd_tall(
            diag in proptest::collection::vec(-2.0f64..2.0, 1..24),
            seed in proptest::collection::vec(0.05f64..2.0, 24),
        ) {
            let sub: Vec<f64> = seed[..diag.len()].to_vec();
            let b = Bidiagonal::tall(diag.clone(), sub.clone());
            let dense = dense_smallest_singular_value(&dense_tall(&diag, &sub));
            let fast = b.smallest_singular_value();
            prop_assert!((fast - dense).abs() <= 1e-12 * (1.0 + dense), "{} vs {}", fast, dense);
        }

        #[test]
        fn counts_agree_with_dense_spectrum(
            diag in proptest::collection::vec(-2.0f64..2.0, 2..16),
            seed in proptest::collection::vec(0.05f64..2.0, 16),
            x in 0.01f64..3.0,
        ) {
            let off: Vec<f64> = seed[..diag.len() - 1].to_vec();
            let b = Bidiagonal::upper(diag.clone(), off.clone());
            let sv = dense_upper(&diag, &off).singular_values();
            // skip thresholds that sit on a singular value
            prop_assume!(sv.iter().all(|s| (s - x).abs() > 1e-9));
            let dense = sv.iter().filter(|s| **s < x).count();
            prop_assert_eq!(b.count_below(x), dense);
        }
    }
}
