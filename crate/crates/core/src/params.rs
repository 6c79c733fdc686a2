//! Model parameters for the two-community directed stochastic block model.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The experiment parameter tuple `(n, a, b, s, c)`.
///
/// * `n` — number of vertices, even, split into two communities of `n/2`;
/// * `a` — within-community kernel entry, edge probability `(a/n) ∧ 1`;
/// * `b` — cross-community kernel entry, edge probability `(b/n) ∧ 1`;
/// * `s` — fraction of community 1 whose labels are known (the seeds);
/// * `c` — damping factor of personalized PageRank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub c: f64,
}

impl ModelParams {
    pub fn new(n: usize, a: f64, b: f64, s: f64, c: f64) -> Result<Self> {
        let p = Self { n, a, b, s, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 {
            return Err(Error::invalid_params(format!(
                "n must be even and at least 2, got {}",
                self.n
            )));
        }
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid_params(format!(
                    "{name} must be a finite non-negative real, got {v}"
                )));
            }
        }
        if !self.s.is_finite() || self.s <= 0.0 || self.s >= 1.0 {
            return Err(Error::invalid_params(format!(
                "s must lie in (0,1), got {}",
                self.s
            )));
        }
        if !self.c.is_finite() || self.c <= 0.0 || self.c >= 1.0 {
            return Err(Error::invalid_params(format!(
                "c must lie in (0,1), got {}",
                self.c
            )));
        }
        Ok(())
    }

    /// Community size `n/2`. Both communities have exactly this many vertices.
    pub fn community_size(&self) -> usize {
        self.n / 2
    }

    /// Number of seeds: `s·n/2` rounded to the nearest integer, at least 1.
    pub fn seed_count(&self) -> usize {
        let k = (self.s * self.community_size() as f64).round() as usize;
        k.max(1)
    }

    /// Edge probability between two distinct vertices of the same community.
    pub fn p_within(&self) -> f64 {
        (self.a / self.n as f64).min(1.0)
    }

    /// Edge probability between two vertices of different communities.
    pub fn p_cross(&self) -> f64 {
        (self.b / self.n as f64).min(1.0)
    }
}
