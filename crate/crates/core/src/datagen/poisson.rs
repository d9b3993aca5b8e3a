//! Multivariate Poisson vectors sharing a common component.
//!
//! Coordinate `j` of group `k` is `W_0 + W_j` with independent Poisson
//! `W_0 ~ Poi(1)` and `W_j ~ Poi(eta_kj)`, so every pair of coordinates has
//! covariance `var(W_0) = 1`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoissonPattern {
    /// `eta_kj = (1 + theta k) / j`
    Sparse,
    /// `eta_kj = 1/j + theta k / 2`
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonSpec {
    pub pattern: PoissonPattern,
    pub theta: f64,
    pub dim: usize,
}

/// Rate of the shared component.
pub const SHARED_RATE: f64 = 1.0;

impl PoissonSpec {
    /// Rate `eta_kj` for 1-based group `k` and coordinate `j`.
    pub fn rate(&self, k: usize, j: usize) -> f64 {
        let (k, j) = (k as f64, j as f64);
        match self.pattern {
            PoissonPattern::Sparse => (1.0 + self.theta * k) / j,
            PoissonPattern::Dense => 1.0 / j + self.theta * k / 2.0,
        }
    }

    pub fn coordinate_mean(&self, k: usize, j: usize) -> f64 {
        SHARED_RATE + self.rate(k, j)
    }
}

fn poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).expect("finite positive rate").sample(rng) as u64
}

/// One observation of group `k` (1-based).
pub fn mv_poisson_sample<R: Rng + ?Sized>(spec: &PoissonSpec, k: usize, rng: &mut R) -> Vec<u64> {
    let shared = poisson(SHARED_RATE, rng);
    (1..=spec.dim)
        .map(|j| shared + poisson(spec.rate(k, j), rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    #[test]
    fn rates() {
        let dense = PoissonSpec { pattern: PoissonPattern::Dense, theta: 1.0, dim: 5 };
        assert!((dense.rate(3, 2) - 2.0).abs() < 1e-15);
        assert!((dense.coordinate_mean(3, 2) - 3.0).abs() < 1e-15);
        let sparse = PoissonSpec { pattern: PoissonPattern::Sparse, theta: 0.0, dim: 5 };
        assert_eq!(sparse.coordinate_mean(2, 1), 2.0);
    }

    #[test]
    fn zero_rates_give_perfect_correlation() {
        // sparse with theta = -1/k zeroes every eta_kj
        let spec = PoissonSpec { pattern: PoissonPattern::Sparse, theta: -1.0, dim: 6 };
        let mut rng = StreamKey::root(1).rng();
        for _ in 0..200 {
            let x = mv_poisson_sample(&spec, 1, &mut rng);
            assert!(x.iter().all(|&v| v == x[0]));
        }
    }

    #[test]
    fn moments_match_shared_component_model() {
        let spec = PoissonSpec { pattern: PoissonPattern::Sparse, theta: 0.0, dim: 4 };
        let mut rng = StreamKey::root(2).rng();
        let n = 100_000;
        let draws: Vec<Vec<f64>> = (0..n)
            .map(|_| mv_poisson_sample(&spec, 1, &mut rng).into_iter().map(|v| v as f64).collect())
            .collect();
        let mean = |j: usize| draws.iter().map(|d| d[j]).sum::<f64>() / n as f64;
        let means: Vec<f64> = (0..4).map(mean).collect();
        assert!((means[0] - 2.0).abs() < 0.02 * 2.0);
        let cov = |a: usize, b: usize| {
            draws.iter().map(|d| (d[a] - means[a]) * (d[b] - means[b])).sum::<f64>() / n as f64
        };
        for (a, b) in [(0, 1), (1, 3), (2, 3)] {
            assert!((cov(a, b) - 1.0).abs() < 0.05, "cov({a},{b}) = {}", cov(a, b));
        }
        // variance 1 + 1/j, strictly decreasing
        for j in 0..4 {
            let v = cov(j, j);
            assert!((v - (1.0 + 1.0 / (j + 1) as f64)).abs() < 0.05 * v);
        }
    }
}
