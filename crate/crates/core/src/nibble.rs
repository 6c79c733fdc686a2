//! Threshold classification of vertices into community 1 from seed-
//! personalized PageRank scores, with confusion counts and the symmetric
//! difference metric.

use crate::pagerank::PagerankResult;
use crate::params::ModelParams;
use crate::sbm::DsbmGraph;
use crate::{Error, Result};

/// Confusion counts with community 1 as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Outcome of thresholding one PageRank vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub threshold: f64,
    /// Vertices with score strictly above the threshold.
    pub predicted_c1: Vec<u32>,
    /// Counts over all vertices.
    pub all: Confusion,
    /// Counts over non-seed vertices only.
    pub non_seed: Confusion,
    /// `|C1 symdiff predicted|` over all vertices.
    pub sym_diff: usize,
}

impl ClassificationResult {
    /// Misclassified fraction of community 1, all community-1 vertices in the
    /// denominator (seeds included).
    pub fn misclass_c1(&self, g: &DsbmGraph) -> f64 {
        self.all.false_neg as f64 / g.community_size() as f64
    }

    /// Misclassified fraction of community 1, non-seed denominator.
    pub fn misclass_c1_non_seed(&self, g: &DsbmGraph) -> f64 {
        self.non_seed.false_neg as f64 / (g.community_size() - g.seeds().len()) as f64
    }

    /// Misclassified fraction of community 2.
    pub fn misclass_c2(&self, g: &DsbmGraph) -> f64 {
        self.all.false_pos as f64 / g.community_size() as f64
    }

    /// `(2/n) |C1 symdiff predicted|`, the quantity bounded by delta1+delta2.
    pub fn scaled_sym_diff(&self, g: &DsbmGraph) -> f64 {
        2.0 * self.sym_diff as f64 / g.n() as f64
    }
}

/// Default cutoff `x0 = 5s/8`.
pub fn default_threshold(params: &ModelParams) -> f64 {
    5.0 * params.s / 8.0
}

/// Predicts community 1 as `{v : R_v > x0}` (ties go to community 2) and
/// scores the prediction against the true labels.
pub fn classify(result: &PagerankResult, g: &DsbmGraph, x0: f64) -> Result<ClassificationResult> {
    if result.scores.len() != g.n() {
        return Err(Error::invalid_params(format!(
            "score vector length {} does not match vertex count {}",
            result.scores.len(),
            g.n()
        )));
    }
    if x0.is_nan() {
        return Err(Error::invalid_params("threshold must not be NaN"));
    }
    let mut predicted_c1 = Vec::new();
    let mut all = Confusion::default();
    let mut non_seed = Confusion::default();
    for v in 0..g.n() as u32 {
        let predicted = result.scores[v as usize] > x0;
        let actual_c1 = g.label(v) == 1;
        if predicted {
            predicted_c1.push(v);
        }
        let seed = g.is_seed(v);
        match (actual_c1, predicted) {
            (true, true) => {
                all.true_pos += 1;
                if !seed {
                    non_seed.true_pos += 1;
                }
            }
            (true, false) => {
                all.false_neg += 1;
                if !seed {
                    non_seed.false_neg += 1;
                }
            }
            (false, true) => {
                all.false_pos += 1;
                if !seed {
                    non_seed.false_pos += 1;
                }
            }
            (false, false) => {
                all.true_neg += 1;
                if !seed {
                    non_seed.true_neg += 1;
                }
            }
        }
    }
    let sym_diff = all.false_neg + all.false_pos;
    Ok(ClassificationResult { threshold: x0, predicted_c1, all, non_seed, sym_diff })
}

/// Classifies under every threshold in `grid`, one result per entry.
pub fn sweep_thresholds(
    result: &PagerankResult,
    g: &DsbmGraph,
    grid: &[f64],
) -> Result<Vec<ClassificationResult>> {
    if grid.is_empty() {
        return Err(Error::invalid_params("threshold grid must be nonempty"));
    }
    grid.iter().map(|&x0| classify(result, g, x0)).collect()
}
