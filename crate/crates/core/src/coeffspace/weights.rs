use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named families of coefficient weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    /// `beta_n = 1`
    Hardy,
    /// `beta_n = 1 / sqrt(n + 1)`
    Bergman,
    /// `beta_n = sqrt(n + 1)`
    Dirichlet,
    /// Explicit list supplied by the caller.
    Custom,
}

impl WeightKind {
    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Hardy => "hardy",
            WeightKind::Bergman => "bergman",
            WeightKind::Dirichlet => "dirichlet",
            WeightKind::Custom => "custom",
        }
    }
}

/// Norm weights `beta_0..beta_N` of a weighted coefficient space.
///
/// The norm of `f = sum a_n z^n` is `sqrt(sum beta_n^2 |a_n|^2)`, so
/// `z^n / beta_n` is an orthonormal basis and both `M_z` and the canonical
/// left inverse act as weighted shifts in that basis.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    kind: WeightKind,
    values: Vec<f64>,
    ratio_bound: f64,
}

const TAIL_SERIES_CAP: usize = 400_000;

impl WeightSequence {
    /// Preset weights for degrees `0..=max_degree`.
    pub fn preset(kind: WeightKind, max_degree: usize) -> Result<Self> {
        if kind == WeightKind::Custom {
            return Err(Error::InvalidWeights(
                "custom weights require an explicit beta list".into(),
            ));
        }
        let values = (0..=max_degree).map(|n| preset_beta(kind, n)).collect();
        Self::from_parts(kind, values)
    }

    /// Caller-supplied weights. `beta_0` must equal 1 and every entry must be
    /// positive and finite.
    pub fn custom(values: Vec<f64>) -> Result<Self> {
        Self::from_parts(WeightKind::Custom, values)
    }

    fn from_parts(kind: WeightKind, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidWeights(
                "at least two weights are required".into(),
            ));
        }
        if let Some((n, b)) = values
            .iter()
            .enumerate()
            .find(|(_, b)| !(b.is_finite() && **b > 0.0))
        {
            return Err(Error::InvalidWeights(format!(
                "beta_{n} = {b} is not a positive finite number"
            )));
        }
        if (values[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!(
                "beta_0 must be 1, found {}",
                values[0]
            )));
        }
        let ratio_bound = values
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(0.0_f64, f64::max);
        if !ratio_bound.is_finite() {
            return Err(Error::InvalidWeights("unbounded weight ratios".into()));
        }
        Ok(Self {
            kind,
            values,
            ratio_bound,
        })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest stored degree.
    pub fn max_degree(&self) -> usize {
        self.values.len() - 1
    }

    /// `max_n beta_{n+1} / beta_n` over the stored range: the norm of `M_z` on
    /// the truncation.
    pub fn ratio_bound(&self) -> f64 {
        self.ratio_bound
    }

    /// `max_n beta_n / beta_{n+1}`: the norm of the backward shift.
    pub fn left_ratio_bound(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[0] / w[1])
            .fold(0.0_f64, f64::max)
    }

    fn min_ratio(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `beta_n` for a stored degree, or an upper bound beyond the stored range
    /// (exact for presets).
    pub fn beta(&self, n: usize) -> f64 {
        self.beta_upper(n)
    }

    pub(crate) fn beta_upper(&self, n: usize) -> f64 {
        match self.values.get(n) {
            Some(b) => *b,
            None if self.kind != WeightKind::Custom => preset_beta(self.kind, n),
            None => {
                let last = self.max_degree();
                self.values[last] * self.ratio_bound.powi((n - last) as i32)
            }
        }
    }

    pub(crate) fn beta_lower(&self, n: usize) -> f64 {
        match self.values.get(n) {
            Some(b) => *b,
            None if self.kind != WeightKind::Custom => preset_beta(self.kind, n),
            None => {
                let last = self.max_degree();
                self.values[last] * self.min_ratio().powi((n - last) as i32)
            }
        }
    }

    /// Norm of `M_z` on the whole space (stored range and extrapolated tail).
    pub fn mz_norm(&self) -> f64 {
        match self.kind {
            WeightKind::Hardy | WeightKind::Bergman => 1.0,
            WeightKind::Dirichlet => 2f64.sqrt(),
            WeightKind::Custom => self.ratio_bound,
        }
    }

    /// Norm of the backward shift on the whole space.
    pub fn l_norm(&self) -> f64 {
        match self.kind {
            WeightKind::Hardy | WeightKind::Dirichlet => 1.0,
            WeightKind::Bergman => 2f64.sqrt(),
            WeightKind::Custom => self.left_ratio_bound(),
        }
    }

    /// Upper bound for `||L^j|| = sup_n beta_n / beta_{n+j}`.
    pub fn l_power_norm(&self, j: usize) -> f64 {
        match self.kind {
            WeightKind::Hardy | WeightKind::Dirichlet => 1.0,
            WeightKind::Bergman => ((j + 1) as f64).sqrt(),
            WeightKind::Custom => self.left_ratio_bound().powi(j as i32),
        }
    }

    /// Upper bound for `sum_{k >= 0} |lambda|^k ||L^{k + shift}||`, the norm of
    /// `L^shift (I - lambda L)^{-1}` by its Neumann expansion. Infinite when the
    /// bound does not converge.
    pub fn neumann_norm_bound(&self, lambda_abs: f64, shift: usize) -> f64 {
        if lambda_abs == 0.0 {
            return self.l_power_norm(shift);
        }
        let log_l = lambda_abs.ln();
        tail_series(0, |k| (k as f64 * log_l).exp() * self.l_power_norm(k + shift))
    }

    /// Radius of the disc on which every function of the space converges.
    pub fn radius(&self) -> f64 {
        match self.kind {
            WeightKind::Custom => {
                let n = self.max_degree();
                self.values[n].powf(1.0 / n as f64)
            }
            _ => 1.0,
        }
    }

    /// Spectral radius of the backward shift, `1 / radius`.
    pub fn left_spectral_radius(&self) -> f64 {
        1.0 / self.radius()
    }

    /// `sqrt(sum_{n <= N} |z|^{2n} / beta_n^2)`: norm of point evaluation at
    /// `z` restricted to the stored degrees.
    pub fn point_evaluation_bound(&self, r: f64) -> f64 {
        let r2 = r * r;
        let mut p = 1.0;
        let mut acc = 0.0;
        for b in &self.values {
            acc += p / (b * b);
            p *= r2;
        }
        acc.sqrt()
    }

    /// `sqrt(sum_{n > from} |z|^{2n} / beta_n^2)`; infinite when the series
    /// does not converge.
    pub fn evaluation_tail(&self, r: f64, from: usize) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let log_r2 = 2.0 * r.ln();
        tail_series(from + 1, |n| {
            let b = self.beta_lower(n);
            (n as f64 * log_r2).exp() / (b * b)
        })
        .sqrt()
    }

    /// `sqrt(sum_{n > from} beta_n^2 rho^{2n})`; infinite when the series does
    /// not converge.
    pub fn weighted_geometric_tail(&self, rho: f64, from: usize) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let log_rho2 = 2.0 * rho.ln();
        tail_series(from + 1, |n| {
            let b = self.beta_upper(n);
            b * b * (n as f64 * log_rho2).exp()
        })
        .sqrt()
    }
}

fn preset_beta(kind: WeightKind, n: usize) -> f64 {
    match kind {
        WeightKind::Hardy => 1.0,
        WeightKind::Bergman => 1.0 / ((n + 1) as f64).sqrt(),
        WeightKind::Dirichlet => ((n + 1) as f64).sqrt(),
        WeightKind::Custom => unreachable!("custom weights have no formula"),
    }
}

/// Sums a nonnegative series starting at index `start`, stopping once terms
/// are negligible and decreasing.
fn tail_series(start: usize, term: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for n in start..start + TAIL_SERIES_CAP {
        let t = term(n);
        if !t.is_finite() {
            return f64::INFINITY;
        }
        sum += t;
        if t <= prev && (t <= 1e-18 * sum || t < 1e-300) {
            return sum;
        }
        prev = t;
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_follow_their_formulas() {
        let h = WeightSequence::preset(WeightKind::Hardy, 16).unwrap();
        assert!(h.values().iter().all(|b| *b == 1.0));
        assert_eq!(h.ratio_bound(), 1.0);

        let d = WeightSequence::preset(WeightKind::Dirichlet, 8).unwrap();
        let expect = [1.0, 2f64.sqrt(), 3f64.sqrt(), 2.0];
        for (b, e) in d.values().iter().zip(expect) {
            assert!((b - e).abs() < 1e-15);
        }
        assert!((d.ratio_bound() - 2f64.sqrt()).abs() < 1e-15);

        let b = WeightSequence::preset(WeightKind::Bergman, 8).unwrap();
        assert!((b.values()[3] - 0.5).abs() < 1e-15);
        assert!((b.left_ratio_bound() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn custom_rejects_nonpositive_entries() {
        assert!(matches!(
            WeightSequence::custom(vec![1.0, 0.0, 1.0]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(WeightSequence::custom(vec![1.0, -2.0]).is_err());
        assert!(WeightSequence::custom(vec![2.0, 1.0]).is_err());
        assert!(WeightSequence::preset(WeightKind::Custom, 8).is_err());
    }

    #[test]
    fn custom_radius_tracks_growth() {
        let w = WeightSequence::custom((0..=64).map(|n| 2f64.powi(n)).collect()).unwrap();
        assert!((w.radius() - 2.0).abs() < 1e-12);
        assert!((w.left_spectral_radius() - 0.5).abs() < 1e-12);
        assert_eq!(w.beta(70), 2f64.powi(70));
    }

    #[test]
    fn hardy_tails_match_geometric_sums() {
        let h = WeightSequence::preset(WeightKind::Hardy, 32).unwrap();
        let r: f64 = 0.5;
        let expect = (r.powi(2 * 33) / (1.0 - r * r)).sqrt();
        assert!((h.evaluation_tail(r, 32) - expect).abs() < 1e-14 * expect);
        assert!(h.evaluation_tail(1.0, 32).is_infinite());
        let rho: f64 = 0.25;
        let expect = (rho.powi(2 * 33) / (1.0 - rho * rho)).sqrt();
        assert!((h.weighted_geometric_tail(rho, 32) - expect).abs() < 1e-14 * expect);
    }
}
