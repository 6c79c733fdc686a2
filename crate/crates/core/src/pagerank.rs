//! Scale-free personalized PageRank by damped power iteration.
//!
//! The fixed point computed here is, per vertex,
//! `R_v = c * sum_{w: (w,v) in E} R_w / D_w + (1-c) Q_v`,
//! where `D_w` is the out-degree of `w` and `Q` the scale-free
//! personalization (`Q_v = n q_v`). Dangling vertices pass no mass; their
//! contribution simply leaks, which keeps the finite-n computation aligned
//! with the limit object where in-neighbors always have out-degree >= 1.
//! A restart mode that redirects dangling mass to the personalization is
//! available but not used by the experiments.
//!
//! Iteration starts from `(1-c) Q`, so the t-th iterate equals the length-t
//! partial sum of the Neumann series: iterates are monotone nondecreasing in
//! leak mode and the L1 change contracts by at least `c` per sweep.

use crate::sbm::DsbmGraph;
use crate::{Error, Result};

/// Scale-free personalization vector `Q` (non-negative, not all zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Personalization {
    weights: Vec<f64>,
}

impl Personalization {
    /// Nibble personalization: `Q_v = 1` on seeds, 0 elsewhere.
    pub fn seeds(g: &DsbmGraph) -> Self {
        let mut weights = vec![0.0; g.n()];
        for &v in g.seeds() {
            weights[v as usize] = 1.0;
        }
        Self { weights }
    }

    /// Uniform personalization `q_v = 1/n`, i.e. `Q_v = 1` everywhere.
    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0; n] }
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid_params(
                "personalization weights must be finite and non-negative",
            ));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::invalid_params(
                "personalization must have at least one positive entry",
            ));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// What happens to rank arriving at an out-degree-zero vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DanglingMode {
    /// The mass leaks (literal fixed-point equation). Default.
    #[default]
    Leak,
    /// The mass restarts according to the personalization.
    RestartToPersonalization,
}

#[derive(Debug, Clone, Copy)]
pub struct PagerankOptions {
    pub c: f64,
    /// L1 stopping tolerance on the change per sweep.
    pub tol: f64,
    pub max_iter: usize,
    pub dangling: DanglingMode,
}

impl Default for PagerankOptions {
    fn default() -> Self {
        Self { c: 0.85, tol: 1e-10, max_iter: 1000, dangling: DanglingMode::Leak }
    }
}

impl PagerankOptions {
    pub fn new(c: f64) -> Self {
        Self { c, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || self.c <= 0.0 || self.c >= 1.0 {
            return Err(Error::invalid_params(format!("c must lie in (0,1), got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid_params(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Scale-free PageRank vector with convergence metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PagerankResult {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the final sweep.
    pub residual: f64,
    pub c: f64,
    pub tol: f64,
    /// False when `max_iter` sweeps did not bring the residual under `tol`;
    /// the last iterate and its residual are still returned.
    pub converged: bool,
}

struct Sweeper<'g> {
    g: &'g DsbmGraph,
    base: Vec<f64>,
    inv_out: Vec<f64>,
    q_over_total: Vec<f64>,
    c: f64,
    dangling: DanglingMode,
}

impl<'g> Sweeper<'g> {
    fn new(g: &'g DsbmGraph, q: &Personalization, c: f64, dangling: DanglingMode) -> Self {
        let n = g.n();
        let total = q.total();
        let base: Vec<f64> = q.weights().iter().map(|&w| (1.0 - c) * w).collect();
        let inv_out: Vec<f64> =
            (0..n as u32).map(|v| if g.out_degree(v) > 0 { 1.0 / g.out_degree(v) as f64 } else { 0.0 }).collect();
        let q_over_total = q.weights().iter().map(|&w| w / total).collect();
        Self { g, base, inv_out, q_over_total, c, dangling }
    }

    /// One application of the fixed-point map. Returns the L1 change.
    fn sweep(&self, current: &[f64], next: &mut [f64], share: &mut [f64]) -> f64 {
        let c = self.c;

        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            share
                .par_iter_mut()
                .enumerate()
                .for_each(|(w, s)| *s = c * current[w] * self.inv_out[w]);
        }
        #[cfg(not(feature = "parallel"))]
        for (w, s) in share.iter_mut().enumerate() {
            *s = c * current[w] * self.inv_out[w];
        }

        let restart = match self.dangling {
            DanglingMode::Leak => 0.0,
            DanglingMode::RestartToPersonalization => {
                let dangling_mass: f64 = (0..self.g.n() as u32)
                    .filter(|&v| self.g.out_degree(v) == 0)
                    .map(|v| current[v as usize])
                    .sum();
                c * dangling_mass
            }
        };

        let compute = |v: usize| -> f64 {
            let mut acc = self.base[v];
            for &w in self.g.in_neighbors(v as u32) {
                acc += share[w as usize];
            }
            if restart > 0.0 {
                acc += restart * self.q_over_total[v];
            }
            acc
        };

        #[cfg(feature = "parallel")]
        let residual: f64 = {
            use rayon::prelude::*;
            next.par_iter_mut()
                .enumerate()
                .map(|(v, slot)| {
                    let value = compute(v);
                    let delta = (value - current[v]).abs();
                    *slot = value;
                    delta
                })
                .sum()
        };
        #[cfg(not(feature = "parallel"))]
        let residual: f64 = {
            let mut acc = 0.0;
            for (v, slot) in next.iter_mut().enumerate() {
                let value = compute(v);
                acc += (value - current[v]).abs();
                *slot = value;
            }
            acc
        };
        residual
    }
}

/// Damped power iteration from the `(1-c) Q` start.
///
/// On success the returned vector satisfies the fixed-point equation with L1
/// defect at most `tol`. Hitting `max_iter` is not an `Err`: the result is
/// returned with `converged = false` so the caller can inspect the iterate.
pub fn personalized_pagerank(
    g: &DsbmGraph,
    q: &Personalization,
    opts: &PagerankOptions,
) -> Result<PagerankResult> {
    opts.validate()?;
    if q.weights().len() != g.n() {
        return Err(Error::invalid_params(format!(
            "personalization length {} does not match vertex count {}",
            q.weights().len(),
            g.n()
        )));
    }
    let sweeper = Sweeper::new(g, q, opts.c, opts.dangling);
    let mut current = sweeper.base.clone();
    let mut next = vec![0.0; g.n()];
    let mut share = vec![0.0; g.n()];
    let mut residual = f64::INFINITY;
    for iteration in 1..=opts.max_iter {
        residual = sweeper.sweep(&current, &mut next, &mut share);
        std::mem::swap(&mut current, &mut next);
        if residual <= opts.tol {
            return Ok(PagerankResult {
                scores: current,
                iterations: iteration,
                residual,
                c: opts.c,
                tol: opts.tol,
                converged: true,
            });
        }
    }
    Ok(PagerankResult {
        scores: current,
        iterations: opts.max_iter,
        residual,
        c: opts.c,
        tol: opts.tol,
        converged: false,
    })
}

/// Runs exactly `sweeps` iterations and returns the L1 change of each.
pub fn residual_history(
    g: &DsbmGraph,
    q: &Personalization,
    c: f64,
    sweeps: usize,
) -> Result<Vec<f64>> {
    let opts = PagerankOptions::new(c);
    opts.validate()?;
    if q.weights().len() != g.n() {
        return Err(Error::invalid_params("personalization length mismatch"));
    }
    let sweeper = Sweeper::new(g, q, c, DanglingMode::Leak);
    let mut current = sweeper.base.clone();
    let mut next = vec![0.0; g.n()];
    let mut share = vec![0.0; g.n()];
    let mut history = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        let r = sweeper.sweep(&current, &mut next, &mut share);
        std::mem::swap(&mut current, &mut next);
        history.push(r);
    }
    Ok(history)
}

/// One application of the leak-mode fixed-point map to an arbitrary vector.
/// `||map(R) - R||_1` measures how far `R` is from the fixed point.
pub fn fixed_point_map(g: &DsbmGraph, q: &Personalization, c: f64, scores: &[f64]) -> Vec<f64> {
    let sweeper = Sweeper::new(g, q, c, DanglingMode::Leak);
    let mut next = vec![0.0; g.n()];
    let mut share = vec![0.0; g.n()];
    sweeper.sweep(scores, &mut next, &mut share);
    next
}
