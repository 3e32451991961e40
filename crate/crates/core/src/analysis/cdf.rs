//! Empirical latency CDFs, reliability compliance, and cross-distribution
//! comparison.

use super::AnalysisError;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Empirical cumulative distribution over latency samples: a right-
/// continuous step function P[X <= x].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cdf {
    sorted: Vec<f64>,
}

impl Cdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self, AnalysisError> {
        if samples.is_empty() {
            return Err(AnalysisError::EmptyInput);
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Cdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    /// P[X <= x] with the right-continuous convention.
    pub fn probability_below(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= x);
        count as f64 / self.sorted.len() as f64
    }

    /// Nearest-rank percentile: the smallest sample q-th of the mass sits
    /// at or below.
    pub fn percentile(&self, q: f64) -> f64 {
        assert!((0.0..=1.0).contains(&q), "percentile wants q in [0, 1]");
        let n = self.sorted.len();
        let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[rank - 1]
    }
}

/// Result of a reliability check against a latency bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub limit_ms: f64,
    pub required_reliability: f64,
    pub achieved_reliability: f64,
    pub pass: bool,
}

/// Passes iff P[latency <= limit] meets the required reliability.
pub fn v2x_compliance(cdf: &Cdf, limit_ms: f64, required_reliability: f64) -> ComplianceReport {
    assert!(
        required_reliability > 0.0 && required_reliability <= 1.0,
        "reliability must be in (0, 1]"
    );
    let achieved = cdf.probability_below(limit_ms);
    ComplianceReport {
        limit_ms,
        required_reliability,
        achieved_reliability: achieved,
        pass: achieved >= required_reliability,
    }
}

/// Monte Carlo estimate of P[a < b] over independent draws from the two
/// empirical distributions.
pub fn cross_probability_mc(a: &Cdf, b: &Cdf, pairs: usize, seed: u64) -> f64 {
    assert!(pairs > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = 0usize;
    for _ in 0..pairs {
        let x = a.sorted[rng.gen_range(0..a.sorted.len())];
        let y = b.sorted[rng.gen_range(0..b.sorted.len())];
        if x < y {
            wins += 1;
        }
    }
    wins as f64 / pairs as f64
}

/// Exact P[a < b] over the product of the two sample sets; the oracle the
/// Monte Carlo estimate is checked against.
pub fn cross_probability_exact(a: &Cdf, b: &Cdf) -> f64 {
    let mut wins = 0u64;
    for &y in &b.sorted {
        wins += a.sorted.partition_point(|&x| x < y) as u64;
    }
    wins as f64 / (a.sorted.len() as f64 * b.sorted.len() as f64)
}
