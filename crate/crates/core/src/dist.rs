//! Empirical distributions and the exact two-sample Kolmogorov-Smirnov
//! statistic, used to compare finite-graph PageRank scores against samples of
//! the limiting law.

use crate::{Error, Result};

/// A sorted sample collection for one community.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDist {
    samples: Vec<f64>,
    community: u8,
}

impl EmpiricalDist {
    pub fn new(mut samples: Vec<f64>, community: u8) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid_params("empirical distribution must be nonempty"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::invalid_params("samples must not contain NaN"));
        }
        samples.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(Self { samples, community })
    }

    pub fn community(&self) -> u8 {
        self.community
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sorted view of the samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance (0 for a single sample).
    pub fn variance(&self) -> f64 {
        if self.len() < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (self.len() as f64 - 1.0)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.len() as f64).sqrt()
    }

    /// Empirical CDF: fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.samples[0]
    }

    pub fn max(&self) -> f64 {
        *self.samples.last().unwrap()
    }
}

/// Exact two-sample Kolmogorov-Smirnov statistic
/// `sup_x |F1(x) - F2(x)|`, tie-aware.
pub fn ks_distance(d1: &EmpiricalDist, d2: &EmpiricalDist) -> f64 {
    let (x, y) = (d1.samples(), d2.samples());
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut max_diff = 0.0f64;
    while i < x.len() || j < y.len() {
        let value = match (x.get(i), y.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => break,
        };
        while i < x.len() && x[i] == value {
            i += 1;
        }
        while j < y.len() && y[j] == value {
            j += 1;
        }
        let diff = (i as f64 / nx - j as f64 / ny).abs();
        max_diff = max_diff.max(diff);
    }
    max_diff
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> EmpiricalDist {
        EmpiricalDist::new(v.to_vec(), 1).unwrap()
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert!(EmpiricalDist::new(vec![], 1).is_err());
        assert!(EmpiricalDist::new(vec![1.0, f64::NAN], 1).is_err());
    }

    #[test]
    fn moments_and_cdf() {
        let d = dist(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(d.samples(), &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(d.mean(), 2.0);
        assert!((d.variance() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(2.0), 0.75);
        assert_eq!(d.cdf(10.0), 1.0);
        assert_eq!(d.min(), 1.0);
        assert_eq!(d.max(), 3.0);
    }

    #[test]
    fn identical_samples_have_zero_distance() {
        let d1 = dist(&[0.1, 0.7, 0.7, 2.0]);
        let d2 = dist(&[0.7, 2.0, 0.1, 0.7]);
        assert_eq!(ks_distance(&d1, &d2), 0.0);
    }

    #[test]
    fn disjoint_supports_have_distance_one() {
        let d1 = dist(&[0.0, 1.0, 2.0]);
        let d2 = dist(&[5.0, 6.0]);
        assert_eq!(ks_distance(&d1, &d2), 1.0);
        assert_eq!(ks_distance(&d2, &d1), 1.0);
    }

    #[test]
    fn hand_computed_case() {
        // F1 jumps at 1 (.5) and 2 (1); F2 jumps at 1 (.5) and 3 (1).
        // Max gap is 0.5 on [2, 3).
        let d1 = dist(&[1.0, 2.0]);
        let d2 = dist(&[1.0, 3.0]);
        assert!((ks_distance(&d1, &d2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unequal_sizes_with_ties() {
        let d1 = dist(&[0.0, 0.0, 1.0]);
        let d2 = dist(&[0.0, 1.0]);
        // F1(0) = 2/3, F2(0) = 1/2 -> diff 1/6; at 1 both reach 1
        assert!((ks_distance(&d1, &d2) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ks_bounded_by_one_on_random_inputs() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a: Vec<f64> = (0..rng.gen_range(1..40)).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..rng.gen_range(1..40)).map(|_| rng.gen::<f64>()).collect();
            let d = ks_distance(&dist(&a), &dist(&b));
            assert!((0.0..=1.0).contains(&d));
            // symmetry
            assert_eq!(d, ks_distance(&dist(&b), &dist(&a)));
        }
    }
}
