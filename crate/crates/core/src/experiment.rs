//! Reproducible experiment pipelines: seeded replications, CSV rows, JSON
//! summaries. All randomness is derived from one top-level seed through
//! labeled substreams (`component label` x `replication index`), so each
//! sub-experiment can be re-run in isolation and two runs with the same seed
//! produce byte-identical reports.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dist::{ks_distance, EmpiricalDist};
use crate::gw::{self, FpParams};
use crate::nibble;
use crate::pagerank::{personalized_pagerank, PagerankOptions, Personalization};
use crate::params::ModelParams;
use crate::report::{Aggregate, Table};
use crate::rng;
use crate::sbm::DsbmGraph;
use crate::theory::{self, TheoryStats};
use crate::{Error, Result};

/// Fixed experiment pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentMode {
    Figure1,
    Figure2,
    Convergence,
    Bounds,
}

impl ExperimentMode {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentMode::Figure1 => "figure1",
            ExperimentMode::Figure2 => "figure2",
            ExperimentMode::Convergence => "convergence",
            ExperimentMode::Bounds => "bounds",
        }
    }
}

impl std::str::FromStr for ExperimentMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "figure1" => Ok(ExperimentMode::Figure1),
            "figure2" => Ok(ExperimentMode::Figure2),
            "convergence" => Ok(ExperimentMode::Convergence),
            "bounds" => Ok(ExperimentMode::Bounds),
            other => Err(Error::invalid_params(format!(
                "unknown mode `{other}` (expected figure1|figure2|convergence|bounds)"
            ))),
        }
    }
}

/// One `(a, b, s, c)` row of the bounds table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub c: f64,
}

/// Full configuration of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: ExperimentMode,
    pub model: ModelParams,
    pub rng_seed: u64,
    pub replications: usize,
    pub output_dir: PathBuf,
    /// Classification threshold; `None` means `5s/8`.
    pub x0: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub write_vertices: bool,
    /// Damping grid `(lo, hi, step)` for the figure2 sweep.
    pub c_grid: (f64, f64, f64),
    /// Graph sizes for the convergence ladder.
    pub ladder: Vec<usize>,
    pub fp_samples: usize,
    pub fp_tol: f64,
    pub bounds_rows: Vec<BoundsRow>,
    pub epsilon: f64,
}

impl ExperimentConfig {
    /// Mode defaults. Figure parameters follow the reference simulations:
    /// figure1 uses `(n, a, b, s, c) = (20000, 150, 10, 0.2, 0.85)`, figure2
    /// sweeps `c` on `(n, a, b, s) = (2000, 100, 2, 0.15)`.
    pub fn defaults(mode: ExperimentMode) -> Self {
        let base = Self {
            mode,
            model: ModelParams { n: 20000, a: 150.0, b: 10.0, s: 0.2, c: 0.85 },
            rng_seed: 20240,
            replications: 5,
            output_dir: PathBuf::from(format!("out-{}", mode.name())),
            x0: None,
            tol: 1e-10,
            max_iter: 1000,
            write_vertices: false,
            c_grid: (0.5, 0.99, 0.01),
            ladder: vec![2500, 5000, 10000, 20000],
            fp_samples: 100_000,
            fp_tol: 1e-6,
            bounds_rows: vec![
                BoundsRow { a: 9950.0, b: 50.0, s: 0.9, c: 0.95 },
                BoundsRow { a: 150.0, b: 10.0, s: 0.2, c: 0.85 },
            ],
            epsilon: 0.05,
        };
        match mode {
            ExperimentMode::Figure1 => base,
            ExperimentMode::Figure2 => Self {
                model: ModelParams { n: 2000, a: 100.0, b: 2.0, s: 0.15, c: 0.85 },
                replications: 3,
                tol: 1e-8,
                max_iter: 5000,
                ..base
            },
            ExperimentMode::Convergence => Self { replications: 1, ..base },
            // classification margins dwarf the iteration tolerance here, and
            // the dense rows are expensive per sweep
            ExperimentMode::Bounds => Self { tol: 1e-4, max_iter: 2000, ..base },
        }
    }

    /// Applies flat `key = value` pairs on top of the current configuration.
    /// Later pairs win; `row` pairs accumulate (first `row` clears defaults).
    pub fn apply_kv(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut rows_replaced = false;
        for (key, value) in pairs {
            let v = value.trim();
            match key.as_str() {
                "mode" => self.mode = v.parse()?,
                "n" => self.model.n = parse_kv(v, key)?,
                "a" => self.model.a = parse_kv(v, key)?,
                "b" => self.model.b = parse_kv(v, key)?,
                "s" => self.model.s = parse_kv(v, key)?,
                "c" => self.model.c = parse_kv(v, key)?,
                "rng_seed" => self.rng_seed = parse_kv(v, key)?,
                "replications" => self.replications = parse_kv(v, key)?,
                "output_dir" => self.output_dir = PathBuf::from(v),
                "x0" => {
                    self.x0 = if v == "auto" { None } else { Some(parse_kv(v, key)?) };
                }
                "tol" => self.tol = parse_kv(v, key)?,
                "max_iter" => self.max_iter = parse_kv(v, key)?,
                "write_vertices" => self.write_vertices = parse_bool(v, key)?,
                "c_lo" => self.c_grid.0 = parse_kv(v, key)?,
                "c_hi" => self.c_grid.1 = parse_kv(v, key)?,
                "c_step" => self.c_grid.2 = parse_kv(v, key)?,
                "ladder" => {
                    self.ladder = v
                        .split(',')
                        .map(|t| parse_kv(t.trim(), key))
                        .collect::<Result<Vec<usize>>>()?;
                }
                "fp_samples" => self.fp_samples = parse_kv(v, key)?,
                "fp_tol" => self.fp_tol = parse_kv(v, key)?,
                "epsilon" => self.epsilon = parse_kv(v, key)?,
                "row" => {
                    if !rows_replaced {
                        self.bounds_rows.clear();
                        rows_replaced = true;
                    }
                    let fields: Vec<&str> = v.split_whitespace().collect();
                    if fields.len() != 4 {
                        return Err(Error::invalid_params(format!(
                            "row must be `a b s c`, got `{v}`"
                        )));
                    }
                    self.bounds_rows.push(BoundsRow {
                        a: parse_kv(fields[0], key)?,
                        b: parse_kv(fields[1], key)?,
                        s: parse_kv(fields[2], key)?,
                        c: parse_kv(fields[3], key)?,
                    });
                }
                other => {
                    return Err(Error::invalid_params(format!("unknown config key `{other}`")));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replications == 0 {
            return Err(Error::invalid_params("replications must be >= 1"));
        }
        if self.mode == ExperimentMode::Figure2 {
            let (lo, hi, step) = self.c_grid;
            if !(lo > 0.0 && hi < 1.0 && lo <= hi && step > 0.0) {
                return Err(Error::invalid_params(format!(
                    "bad damping grid ({lo}, {hi}, {step})"
                )));
            }
        }
        if self.mode == ExperimentMode::Bounds && self.bounds_rows.is_empty() {
            return Err(Error::invalid_params("bounds mode needs at least one row"));
        }
        Ok(())
    }

    /// Effective configuration as flat key-value pairs (the echo stored in
    /// reports).
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("mode".into(), self.mode.name().to_string());
        m.insert("n".into(), self.model.n.to_string());
        m.insert("a".into(), format!("{}", self.model.a));
        m.insert("b".into(), format!("{}", self.model.b));
        m.insert("s".into(), format!("{}", self.model.s));
        m.insert("c".into(), format!("{}", self.model.c));
        m.insert("rng_seed".into(), self.rng_seed.to_string());
        m.insert("replications".into(), self.replications.to_string());
        m.insert("output_dir".into(), self.output_dir.display().to_string());
        m.insert("x0".into(), self.x0.map_or("auto".into(), |x| format!("{x}")));
        m.insert("tol".into(), format!("{}", self.tol));
        m.insert("max_iter".into(), self.max_iter.to_string());
        m.insert("write_vertices".into(), self.write_vertices.to_string());
        match self.mode {
            ExperimentMode::Figure2 => {
                m.insert("c_lo".into(), format!("{}", self.c_grid.0));
                m.insert("c_hi".into(), format!("{}", self.c_grid.1));
                m.insert("c_step".into(), format!("{}", self.c_grid.2));
            }
            ExperimentMode::Convergence => {
                let ladder: Vec<String> = self.ladder.iter().map(|n| n.to_string()).collect();
                m.insert("ladder".into(), ladder.join(","));
                m.insert("fp_samples".into(), self.fp_samples.to_string());
                m.insert("fp_tol".into(), format!("{}", self.fp_tol));
            }
            ExperimentMode::Bounds => {
                m.insert("epsilon".into(), format!("{}", self.epsilon));
                for (i, row) in self.bounds_rows.iter().enumerate() {
                    m.insert(
                        format!("row{}", i + 1),
                        format!("{} {} {} {}", row.a, row.b, row.s, row.c),
                    );
                }
            }
            ExperimentMode::Figure1 => {}
        }
        m
    }
}

fn parse_kv<T: std::str::FromStr>(v: &str, key: &str) -> Result<T> {
    v.parse().map_err(|_| Error::invalid_params(format!("cannot parse `{v}` for key `{key}`")))
}

fn parse_bool(v: &str, key: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::invalid_params(format!("cannot parse `{other}` for key `{key}`"))),
    }
}

/// Reads a flat `key = value` file (`#` comments, blank lines allowed).
/// Returns pairs in file order.
pub fn read_config_file(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(idx + 1, format!("expected `key = value`, got `{raw}`")))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// JSON side of a report: provenance, per-mode metrics and the aggregates of
/// the CSV rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportSummary {
    pub mode: String,
    pub crate_version: String,
    pub rng_seed: u64,
    pub replications: usize,
    pub config: BTreeMap<String, String>,
    pub theory: Option<TheoryStats>,
    pub metrics: BTreeMap<String, f64>,
    pub aggregates: BTreeMap<String, Aggregate>,
    pub notes: Vec<String>,
}

/// A finished experiment: the summary plus the per-replication rows.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub summary: ReportSummary,
    pub rows: Table,
}

impl ExperimentReport {
    fn assemble(
        cfg: &ExperimentConfig,
        theory: Option<TheoryStats>,
        rows: Table,
        metrics: BTreeMap<String, f64>,
        notes: Vec<String>,
    ) -> Self {
        let summary = ReportSummary {
            mode: cfg.mode.name().to_string(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            rng_seed: cfg.rng_seed,
            replications: cfg.replications,
            config: cfg.echo(),
            theory,
            metrics,
            aggregates: rows.aggregates(),
            notes,
        };
        Self { summary, rows }
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.rows.save(dir.join("rows.csv"))?;
        let json = serde_json::to_string_pretty(&self.summary)
            .map_err(|e| Error::invalid_params(format!("summary serialization failed: {e}")))?;
        std::fs::write(dir.join("summary.json"), json + "\n")?;
        Ok(())
    }

    /// Loads a saved report and checks that the stored aggregates match a
    /// recomputation from the rows.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let rows = Table::load(dir.join("rows.csv"))?;
        let file = std::fs::File::open(dir.join("summary.json"))?;
        let summary: ReportSummary = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::invalid_params(format!("summary.json: {e}")))?;
        let recomputed = rows.aggregates();
        if recomputed.len() != summary.aggregates.len() {
            return Err(Error::invalid_params(
                "stored aggregates do not cover the same columns as `rows.csv`",
            ));
        }
        for (name, agg) in &recomputed {
            let stored = summary.aggregates.get(name).ok_or_else(|| {
                Error::invalid_params(format!("aggregate for column `{name}` missing"))
            })?;
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
            if !close(agg.mean, stored.mean) || !close(agg.std, stored.std) {
                return Err(Error::invalid_params(format!(
                    "aggregate mismatch for `{name}`: stored {stored:?}, recomputed {agg:?}"
                )));
            }
        }
        Ok(Self { summary, rows })
    }
}

fn graph_seed(cfg: &ExperimentConfig, label: &str, index: u64) -> u64 {
    rng::splitmix64(rng::component_key(cfg.rng_seed, label) ^ index)
}

fn pagerank_opts(cfg: &ExperimentConfig, c: f64) -> PagerankOptions {
    PagerankOptions { c, tol: cfg.tol, max_iter: cfg.max_iter, ..Default::default() }
}

fn vertices_table(g: &DsbmGraph, scores: &[f64]) -> Table {
    let mut t = Table::new(&["v", "label", "is_seed", "R"]);
    for v in 0..g.n() as u32 {
        t.push_row(vec![
            (v + 1) as f64,
            g.label(v) as f64,
            g.is_seed(v) as u8 as f64,
            scores[v as usize],
        ]);
    }
    t
}

/// Generate -> PageRank -> classify, replicated. Emits misclassification
/// summaries and (optionally) one per-vertex score table per replication for
/// the scatter figure.
pub fn run_figure1(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let p = cfg.model;
    let stats = theory::evaluate(p.a, p.b, p.s, p.c)?;
    let x0 = cfg.x0.unwrap_or_else(|| nibble::default_threshold(&p));
    std::fs::create_dir_all(&cfg.output_dir)?;

    let mut rows = Table::new(&[
        "replication",
        "misclass_c1",
        "misclass_c1_non_seed",
        "misclass_c2",
        "sym_diff",
        "scaled_sym_diff",
        "iterations",
        "residual",
    ]);
    let mut non_converged = 0usize;
    for rep in 0..cfg.replications {
        let g = DsbmGraph::generate(&p, graph_seed(cfg, "figure1.graph", rep as u64))?;
        let q = Personalization::seeds(&g);
        let pr = personalized_pagerank(&g, &q, &pagerank_opts(cfg, p.c))?;
        if !pr.converged {
            non_converged += 1;
        }
        let cls = nibble::classify(&pr, &g, x0)?;
        rows.push_row(vec![
            rep as f64,
            cls.misclass_c1(&g),
            cls.misclass_c1_non_seed(&g),
            cls.misclass_c2(&g),
            cls.sym_diff as f64,
            cls.scaled_sym_diff(&g),
            pr.iterations as f64,
            pr.residual,
        ]);
        if cfg.write_vertices {
            vertices_table(&g, &pr.scores)
                .save(cfg.output_dir.join(format!("vertices_rep{rep}.csv")))?;
        }
        // partial results stay on disk if a later replication fails
        rows.save(cfg.output_dir.join("rows.csv"))?;
    }

    let agg = rows.aggregates();
    let mean_all = agg["misclass_c1"].mean;
    let mean_non_seed = agg["misclass_c1_non_seed"].mean;
    let mut metrics = BTreeMap::new();
    metrics.insert("x0".into(), x0);
    metrics.insert("non_converged".into(), non_converged as f64);
    let notes = vec![format!(
        "calibration: mean community-1 misclassification is {mean_all:.4} with all community-1 \
         vertices in the denominator and {mean_non_seed:.4} over non-seeds only; the limiting \
         law itself predicts a rate of this size, since the non-seed community-1 mean {:.4} \
         sits within one standard deviation ({:.4}) of the cutoff {x0}",
        stats.r1_hat,
        (stats.v1 - (1.0 - p.c) * (1.0 - p.c) * p.s * (1.0 - p.s)).max(0.0).sqrt(),
    )];
    let report = ExperimentReport::assemble(cfg, Some(stats), rows, metrics, notes);
    report.save(&cfg.output_dir)?;
    Ok(report)
}

/// Sweeps the damping factor on a fixed set of replicated graphs and compares
/// the empirical separation between non-seed community 1 and community 2
/// against the closed-form curve and its analytic maximizer.
pub fn run_figure2(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let p = cfg.model;
    let (second_eig, c_star) = theory::optimal_damping(p.a, p.b)?;
    std::fs::create_dir_all(&cfg.output_dir)?;

    let (lo, hi, step) = cfg.c_grid;
    let mut grid = Vec::new();
    let mut c = lo;
    while c <= hi + 1e-12 {
        grid.push(c.min(hi));
        c += step;
    }

    let graphs: Vec<DsbmGraph> = (0..cfg.replications)
        .map(|rep| DsbmGraph::generate(&p, graph_seed(cfg, "figure2.graph", rep as u64)))
        .collect::<Result<_>>()?;
    let seed_count = graphs[0].seeds().len();
    let half = p.n / 2;

    let mut rows =
        Table::new(&["c", "empirical_gap_mean", "empirical_gap_std", "closed_form_gap"]);
    for &cj in &grid {
        let mut gaps = Vec::with_capacity(graphs.len());
        for g in &graphs {
            let q = Personalization::seeds(g);
            let pr = personalized_pagerank(g, &q, &pagerank_opts(cfg, cj))?;
            let mean_non_seed: f64 =
                pr.scores[seed_count..half].iter().sum::<f64>() / (half - seed_count) as f64;
            let mean_c2: f64 = pr.scores[half..].iter().sum::<f64>() / half as f64;
            gaps.push(mean_non_seed - mean_c2);
        }
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / gaps.len() as f64;
        rows.push_row(vec![cj, mean, var.sqrt(), theory::mean_separation(p.a, p.b, p.s, cj)?]);
    }

    let gap_means = rows.column("empirical_gap_mean").unwrap();
    let argmax = grid
        .iter()
        .zip(&gap_means)
        .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .map(|(c, _)| *c)
        .unwrap();
    let mut metrics = BTreeMap::new();
    metrics.insert("second_eig".into(), second_eig);
    metrics.insert("c_star_analytic".into(), c_star);
    metrics.insert("c_star_empirical".into(), argmax);
    let report = ExperimentReport::assemble(cfg, None, rows, metrics, Vec::new());
    report.save(&cfg.output_dir)?;
    Ok(report)
}

/// Kolmogorov-Smirnov distances between finite-n per-community PageRank
/// distributions and limit-law samples, along a doubling ladder of graph
/// sizes.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let p = cfg.model;
    std::fs::create_dir_all(&cfg.output_dir)?;

    let depth = gw::depth_for_tolerance(p.c, cfg.fp_tol);
    let fp = FpParams {
        a: p.a,
        b: p.b,
        s: p.s,
        c: p.c,
        depth,
        n_samples: cfg.fp_samples,
        rng_seed: graph_seed(cfg, "convergence.fp", 0),
        node_budget: gw::DEFAULT_NODE_BUDGET,
    };
    let (limit_c1, limit_c2) = gw::sample_both(&fp)?;

    let mut rows = Table::new(&["n", "ks_c1", "ks_c2"]);
    for &n in &cfg.ladder {
        let model = ModelParams { n, ..p };
        model.validate()?;
        let g = DsbmGraph::generate(&model, graph_seed(cfg, "convergence.graph", n as u64))?;
        let q = Personalization::seeds(&g);
        let pr = personalized_pagerank(&g, &q, &pagerank_opts(cfg, p.c))?;
        let half = n / 2;
        let emp_c1 = EmpiricalDist::new(pr.scores[..half].to_vec(), 1)?;
        let emp_c2 = EmpiricalDist::new(pr.scores[half..].to_vec(), 2)?;
        rows.push_row(vec![
            n as f64,
            ks_distance(&emp_c1, &limit_c1),
            ks_distance(&emp_c2, &limit_c2),
        ]);
        rows.save(cfg.output_dir.join("rows.csv"))?;
    }

    let mut metrics = BTreeMap::new();
    metrics.insert("depth".into(), depth as f64);
    metrics.insert("truncation_bound".into(), gw::truncation_bound(p.c, depth));
    metrics.insert("fp_samples".into(), cfg.fp_samples as f64);
    let stats = theory::evaluate(p.a, p.b, p.s, p.c)?;
    let report = ExperimentReport::assemble(cfg, Some(stats), rows, metrics, Vec::new());
    report.save(&cfg.output_dir)?;
    Ok(report)
}

/// For each `(a, b, s, c)` row: condition flags, the packaged bounds, the
/// empirical scaled symmetric difference from replicated simulations, and
/// the verdicts. Rows whose hypotheses fail are flagged and excluded from
/// verdicts (NaN).
pub fn run_bounds_table(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut rows = Table::new(&[
        "a",
        "b",
        "s",
        "c",
        "conditions_met",
        "delta1",
        "delta2",
        "delta",
        "mean_scaled_sym_diff",
        "max_scaled_sym_diff",
        "holds",
        "holds_with_eps",
    ]);
    let mut notes = Vec::new();
    for (row_idx, row) in cfg.bounds_rows.iter().enumerate() {
        let model = ModelParams { n: cfg.model.n, a: row.a, b: row.b, s: row.s, c: row.c };
        model.validate()?;
        let mb = theory::misclassification_bounds(row.a, row.b, row.s, row.c);
        let delta = mb.delta1 + mb.delta2;
        let x0 = cfg.x0.unwrap_or(5.0 * row.s / 8.0);

        let mut scaled = Vec::with_capacity(cfg.replications);
        for rep in 0..cfg.replications {
            let seed = rng::splitmix64(
                rng::component_key(cfg.rng_seed, "bounds.graph")
                    ^ ((row_idx as u64) << 32 | rep as u64),
            );
            let g = DsbmGraph::generate(&model, seed)?;
            let q = Personalization::seeds(&g);
            let pr = personalized_pagerank(&g, &q, &pagerank_opts(cfg, row.c))?;
            let cls = nibble::classify(&pr, &g, x0)?;
            scaled.push(cls.scaled_sym_diff(&g));
        }
        let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
        let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (holds, holds_eps) = if mb.conditions_met {
            ((max <= delta) as u8 as f64, (max <= delta + cfg.epsilon) as u8 as f64)
        } else {
            notes.push(format!(
                "row ({}, {}, {}, {}): hypotheses fail, excluded from verdicts",
                row.a, row.b, row.s, row.c
            ));
            (f64::NAN, f64::NAN)
        };
        rows.push_row(vec![
            row.a,
            row.b,
            row.s,
            row.c,
            mb.conditions_met as u8 as f64,
            mb.delta1,
            mb.delta2,
            delta,
            mean,
            max,
            holds,
            holds_eps,
        ]);
        rows.save(cfg.output_dir.join("rows.csv"))?;
    }
    let mut metrics = BTreeMap::new();
    metrics.insert("epsilon".into(), cfg.epsilon);
    let report = ExperimentReport::assemble(cfg, None, rows, metrics, notes);
    report.save(&cfg.output_dir)?;
    Ok(report)
}

/// Dispatches on the configured mode.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.mode {
        ExperimentMode::Figure1 => run_figure1(cfg),
        ExperimentMode::Figure2 => run_figure2(cfg),
        ExperimentMode::Convergence => run_convergence(cfg),
        ExperimentMode::Bounds => run_bounds_table(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("prnibble_{tag}_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn small_figure1_config(tag: &str) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(ExperimentMode::Figure1);
        cfg.model = ModelParams { n: 400, a: 30.0, b: 2.0, s: 0.2, c: 0.85 };
        cfg.replications = 3;
        cfg.output_dir = temp_dir(tag);
        cfg.write_vertices = true;
        cfg
    }

    #[test]
    fn config_kv_overrides() {
        let mut cfg = ExperimentConfig::defaults(ExperimentMode::Figure1);
        let pairs = vec![
            ("n".to_string(), "400".to_string()),
            ("c".to_string(), "0.7".to_string()),
            ("x0".to_string(), "auto".to_string()),
            ("replications".to_string(), "2".to_string()),
            ("write_vertices".to_string(), "true".to_string()),
        ];
        cfg.apply_kv(&pairs).unwrap();
        assert_eq!(cfg.model.n, 400);
        assert_eq!(cfg.model.c, 0.7);
        assert_eq!(cfg.replications, 2);
        assert!(cfg.write_vertices);
        assert!(cfg.x0.is_none());
        assert!(cfg.apply_kv(&[("bogus".into(), "1".into())]).is_err());
    }

    #[test]
    fn config_file_parsing() {
        let dir = temp_dir("cfgfile");
        let path = dir.join("exp.conf");
        std::fs::write(&path, "# comment\nn = 400\n\nc = 0.6 # trailing\nrow = 10 2 0.5 0.6\n")
            .unwrap();
        let pairs = read_config_file(&path).unwrap();
        assert_eq!(pairs.len(), 3);
        assert_eq!(pairs[0], ("n".to_string(), "400".to_string()));
        assert_eq!(pairs[1], ("c".to_string(), "0.6".to_string()));
        let bad = dir.join("bad.conf");
        std::fs::write(&bad, "just words\n").unwrap();
        assert!(matches!(read_config_file(&bad), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn figure1_report_round_trips_and_is_deterministic() {
        let cfg = small_figure1_config("fig1");
        let r1 = run_figure1(&cfg).unwrap();
        let r2 = run_figure1(&cfg).unwrap();
        assert_eq!(r1.rows.rows(), r2.rows.rows());
        assert_eq!(
            serde_json::to_string(&r1.summary).unwrap(),
            serde_json::to_string(&r2.summary).unwrap()
        );
        let loaded = ExperimentReport::load(&cfg.output_dir).unwrap();
        assert_eq!(loaded.rows, r1.rows);
        // vertex tables round-trip through the csv reader
        let verts = Table::load(cfg.output_dir.join("vertices_rep0.csv")).unwrap();
        assert_eq!(verts.len(), 400);
        assert_eq!(verts.columns(), &["v", "label", "is_seed", "R"]);
    }

    #[test]
    fn figure1_without_cross_edges_never_misclassifies_community_two() {
        let mut cfg = small_figure1_config("fig1_b0");
        cfg.model.b = 0.0;
        cfg.replications = 2;
        let report = run_figure1(&cfg).unwrap();
        for row in report.rows.rows() {
            let idx = report.rows.column_index("misclass_c2").unwrap();
            assert_eq!(row[idx], 0.0);
        }
    }

    #[test]
    fn figure2_grid_and_argmax() {
        let mut cfg = ExperimentConfig::defaults(ExperimentMode::Figure2);
        cfg.model = ModelParams { n: 600, a: 40.0, b: 2.0, s: 0.15, c: 0.85 };
        cfg.replications = 2;
        cfg.c_grid = (0.5, 0.9, 0.05);
        cfg.output_dir = temp_dir("fig2");
        let report = run_figure2(&cfg).unwrap();
        assert_eq!(report.rows.len(), 9);
        assert!(report.summary.metrics["c_star_analytic"] > 0.5);
        let c_emp = report.summary.metrics["c_star_empirical"];
        assert!((0.5..=0.9).contains(&c_emp));
        // closed-form column matches theory exactly
        let closed = report.rows.column("closed_form_gap").unwrap();
        let cs = report.rows.column("c").unwrap();
        for (c, gap) in cs.iter().zip(closed) {
            let want = theory::mean_separation(40.0, 2.0, 0.15, *c).unwrap();
            assert_eq!(gap, want);
        }
    }

    #[test]
    fn convergence_ladder_runs_small() {
        let mut cfg = ExperimentConfig::defaults(ExperimentMode::Convergence);
        cfg.model = ModelParams { n: 800, a: 20.0, b: 2.0, s: 0.2, c: 0.6 };
        cfg.ladder = vec![200, 400, 800];
        cfg.fp_samples = 4000;
        cfg.fp_tol = 1e-4;
        cfg.output_dir = temp_dir("conv");
        let report = run_convergence(&cfg).unwrap();
        assert_eq!(report.rows.len(), 3);
        for row in report.rows.rows() {
            let ks1 = row[report.rows.column_index("ks_c1").unwrap()];
            let ks2 = row[report.rows.column_index("ks_c2").unwrap()];
            assert!((0.0..=1.0).contains(&ks1));
            assert!((0.0..=1.0).contains(&ks2));
        }
    }

    #[test]
    fn bounds_table_flags_and_verdicts() {
        let mut cfg = ExperimentConfig::defaults(ExperimentMode::Bounds);
        cfg.model.n = 400;
        cfg.replications = 2;
        cfg.bounds_rows = vec![
            BoundsRow { a: 150.0, b: 10.0, s: 0.2, c: 0.85 }, // hypotheses fail
        ];
        cfg.output_dir = temp_dir("bounds");
        let report = run_bounds_table(&cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows.rows()[0];
        let idx = |name: &str| report.rows.column_index(name).unwrap();
        assert_eq!(row[idx("conditions_met")], 0.0);
        assert!(row[idx("holds")].is_nan());
        assert!(!report.summary.notes.is_empty());
        let loaded = ExperimentReport::load(&cfg.output_dir).unwrap();
        assert_eq!(loaded.rows.columns(), report.rows.columns());
        for (r1, r2) in loaded.rows.rows().iter().zip(report.rows.rows()) {
            for (x, y) in r1.iter().zip(r2) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
    }
}
