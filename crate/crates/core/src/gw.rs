//! Monte Carlo sampler for the limiting per-community PageRank laws.
//!
//! The limits solve a pair of distributional fixed-point equations: a type-i
//! value is `c * sum_j value_j / D_j + (1-c) Q`, where the same-type child
//! count is Poisson(a/2), the cross-type count Poisson(b/2), each child
//! carries an independent size-biased out-degree `D = 1 + Poisson((a+b)/2)`,
//! and `Q` is Bernoulli(s) for type 1 and 0 for type 2.
//!
//! Naive recursive expansion is hopeless here: the branching factor is
//! `(a+b)/2` (tens for the regimes of interest), so a tree deep enough for a
//! 1e-6 truncation error would have far more nodes than any budget. The
//! sampler instead iterates the fixed-point map on a sample population:
//! level t+1 draws every child value uniformly from the frozen level-t pool.
//! After `depth+1` sweeps the pool realizes the depth-truncated recursion
//! (leaves pinned to 0) exactly in distribution, up to the O(1/pool)
//! resampling dependence; means telescope exactly by linearity, so they are
//! unbiased at every level. Each `(level, slot)` owns an RNG substream, so
//! the sample multiset is a pure function of the seed regardless of thread
//! count.

use rand::Rng;

use crate::dist::EmpiricalDist;
use crate::rng::stream2;
use crate::theory;
use crate::{Error, Result};

/// Default per-run budget on expected node visits.
pub const DEFAULT_NODE_BUDGET: f64 = 2e10;

/// Parameters of one sampling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpParams {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub c: f64,
    /// Recursion truncation depth: contributions from tree generations
    /// beyond `depth` are dropped.
    pub depth: usize,
    pub n_samples: usize,
    pub rng_seed: u64,
    /// Refuse runs whose expected visit count exceeds this.
    pub node_budget: f64,
}

impl FpParams {
    /// Depth chosen from the deterministic tail bound
    /// `c^(depth+1) / (1-c) <= tol`.
    pub fn with_tolerance(
        a: f64,
        b: f64,
        s: f64,
        c: f64,
        tol: f64,
        n_samples: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::invalid_params(format!("tol must be positive, got {tol}")));
        }
        let p = Self {
            a,
            b,
            s,
            c,
            depth: depth_for_tolerance(c, tol),
            n_samples,
            rng_seed,
            node_budget: DEFAULT_NODE_BUDGET,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid_params(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !self.s.is_finite() || self.s <= 0.0 || self.s >= 1.0 {
            return Err(Error::invalid_params(format!("s must lie in (0,1), got {}", self.s)));
        }
        if !self.c.is_finite() || self.c <= 0.0 || self.c >= 1.0 {
            return Err(Error::invalid_params(format!("c must lie in (0,1), got {}", self.c)));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid_params("n_samples must be positive"));
        }
        let visits = self.expected_node_visits();
        if visits > self.node_budget {
            return Err(Error::BudgetExceeded(format!(
                "expected {visits:.3e} node visits ((depth+1) x samples x (2 + a + b)) exceeds \
                 the budget {:.3e}; lower the depth/tolerance or the sample count",
                self.node_budget
            )));
        }
        Ok(())
    }

    /// Expected visit count: both pools update once per level, and a slot
    /// expands `2 + (a+b)` nodes per level on average.
    pub fn expected_node_visits(&self) -> f64 {
        (self.depth as f64 + 1.0) * self.n_samples as f64 * (2.0 + self.a + self.b)
    }
}

/// Depth `ceil(log(tol (1-c)) / log c)`, which satisfies
/// `c^(depth+1) / (1-c) <= tol` with a one-step margin.
pub fn depth_for_tolerance(c: f64, tol: f64) -> usize {
    let d = ((tol * (1.0 - c)).ln() / c.ln()).ceil();
    if d.is_finite() && d > 0.0 {
        d as usize
    } else {
        0
    }
}

/// `c^(depth+1) / (1-c)`: upper envelope of the truncation error (sup Q = 1).
pub fn truncation_bound(c: f64, depth: usize) -> f64 {
    c.powi(depth as i32 + 1) / (1.0 - c)
}

/// Walker alias table over a truncated Poisson pmf. One uniform per draw;
/// the discarded tail beyond 40 standard deviations carries less than 1e-100
/// of the mass.
struct PoissonAlias {
    offset: u64,
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl PoissonAlias {
    fn new(mu: f64) -> Option<Self> {
        if mu <= 0.0 {
            return None;
        }
        let spread = 40.0 * mu.sqrt() + 20.0;
        let lo = (mu - spread).floor().max(0.0) as u64;
        let hi = (mu + spread).ceil() as u64;
        let ln_mu = mu.ln();
        // log-space weights stay finite for any mu
        let ln_w: Vec<f64> =
            (lo..=hi).map(|n| n as f64 * ln_mu - mu - theory::ln_factorial(n)).collect();
        let peak = ln_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = ln_w.iter().map(|lw| (lw - peak).exp()).collect();
        let total: f64 = w.iter().sum();
        let k = w.len();
        let mut prob: Vec<f64> = w.iter().map(|x| x * k as f64 / total).collect();
        let mut alias = vec![0u32; k];
        let mut small: Vec<u32> = Vec::with_capacity(k);
        let mut large: Vec<u32> = Vec::with_capacity(k);
        for (i, p) in prob.iter().enumerate() {
            if *p < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s as usize] = l;
            prob[l as usize] -= 1.0 - prob[s as usize];
            if prob[l as usize] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        for i in small.into_iter().chain(large) {
            prob[i as usize] = 1.0;
        }
        Some(Self { offset: lo, prob, alias })
    }

    #[inline]
    fn sample(&self, rng: &mut impl Rng) -> u64 {
        let f = rng.gen::<f64>() * self.prob.len() as f64;
        let i = (f as usize).min(self.prob.len() - 1);
        let bucket = if f - i as f64 <= self.prob[i] { i } else { self.alias[i] as usize };
        self.offset + bucket as u64
    }
}

struct LevelDists {
    same: Option<PoissonAlias>,
    cross: Option<PoissonAlias>,
    degree: Option<PoissonAlias>,
}

fn draw(dist: &Option<PoissonAlias>, rng: &mut impl Rng) -> u64 {
    match dist {
        Some(d) => d.sample(rng),
        None => 0,
    }
}

/// Draws both community pools and returns them as
/// `(community 1, community 2)`.
pub fn sample_both(p: &FpParams) -> Result<(EmpiricalDist, EmpiricalDist)> {
    p.validate()?;
    let m = p.n_samples;
    let dists = LevelDists {
        same: PoissonAlias::new(p.a / 2.0),
        cross: PoissonAlias::new(p.b / 2.0),
        degree: PoissonAlias::new((p.a + p.b) / 2.0),
    };

    let mut pool1 = vec![0.0f64; m];
    let mut pool2 = vec![0.0f64; m];
    let mut next1 = vec![0.0f64; m];
    let mut next2 = vec![0.0f64; m];

    for level in 0..=p.depth as u64 {
        let update = |slot: usize| -> (f64, f64) {
            let mut rng = stream2(p.rng_seed, "gw.level", level, slot as u64);
            let mut acc1 = 0.0f64;
            for _ in 0..draw(&dists.same, &mut rng) {
                let child = pool1[rng.gen_range(0..m)];
                let d = 1.0 + draw(&dists.degree, &mut rng) as f64;
                acc1 += child / d;
            }
            for _ in 0..draw(&dists.cross, &mut rng) {
                let child = pool2[rng.gen_range(0..m)];
                let d = 1.0 + draw(&dists.degree, &mut rng) as f64;
                acc1 += child / d;
            }
            let q1 = if rng.gen::<f64>() < p.s { 1.0 } else { 0.0 };
            let value1 = p.c * acc1 + (1.0 - p.c) * q1;

            let mut acc2 = 0.0f64;
            for _ in 0..draw(&dists.cross, &mut rng) {
                let child = pool1[rng.gen_range(0..m)];
                let d = 1.0 + draw(&dists.degree, &mut rng) as f64;
                acc2 += child / d;
            }
            for _ in 0..draw(&dists.same, &mut rng) {
                let child = pool2[rng.gen_range(0..m)];
                let d = 1.0 + draw(&dists.degree, &mut rng) as f64;
                acc2 += child / d;
            }
            (value1, p.c * acc2)
        };

        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            next1
                .par_iter_mut()
                .zip(next2.par_iter_mut())
                .enumerate()
                .for_each(|(slot, (n1, n2))| {
                    let (v1, v2) = update(slot);
                    *n1 = v1;
                    *n2 = v2;
                });
        }
        #[cfg(not(feature = "parallel"))]
        for slot in 0..m {
            let (v1, v2) = update(slot);
            next1[slot] = v1;
            next2[slot] = v2;
        }

        std::mem::swap(&mut pool1, &mut next1);
        std::mem::swap(&mut pool2, &mut next2);
    }

    Ok((EmpiricalDist::new(pool1, 1)?, EmpiricalDist::new(pool2, 2)?))
}

/// Draws the limiting law of the requested community (1 or 2).
pub fn sample_limit_pagerank(p: &FpParams, community: u8) -> Result<EmpiricalDist> {
    let (c1, c2) = sample_both(p)?;
    match community {
        1 => Ok(c1),
        2 => Ok(c2),
        other => Err(Error::invalid_params(format!("community must be 1 or 2, got {other}"))),
    }
}
