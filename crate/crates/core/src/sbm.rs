//! Two-community directed stochastic block model: generation, degree
//! summaries, and a plain-text persistence format.
//!
//! Vertices are `0..n` internally (1-based in files). The first `n/2` vertices
//! are community 1, the rest community 2, and the seed set is a subset of
//! community 1 — by default the prefix `0..seed_count`, matching the vertex
//! layout used in the simulation figures.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::params::ModelParams;
use crate::rng::stream;
use crate::{Error, Result};

/// Largest `n` for which generation samples every ordered pair individually.
/// Larger graphs draw per-block binomial counts and place them uniformly;
/// the two procedures sample the same distribution.
const BERNOULLI_PATH_MAX_N: usize = 2000;

/// How the seed set is chosen inside community 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedPlacement {
    /// Seeds are the first `seed_count` vertices. Default.
    #[default]
    Prefix,
    /// Seeds are a uniform random subset of community 1.
    RandomInCommunity1,
}

/// Immutable sparse directed graph with community labels and a seed set.
///
/// Both adjacency directions are stored in compressed sparse rows with
/// neighbor lists sorted ascending, so equality is structural.
#[derive(Debug, Clone, PartialEq)]
pub struct DsbmGraph {
    n: usize,
    a: f64,
    b: f64,
    s: f64,
    rng_seed: u64,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_targets: Vec<u32>,
    seeds: Vec<u32>,
}

/// Per-community degree summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommunityDegrees {
    pub mean_out: f64,
    pub max_out: usize,
    pub mean_in: f64,
    pub max_in: usize,
}

/// Output of [`DsbmGraph::degree_stats`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub community: [CommunityDegrees; 2],
    /// Number of vertices with out-degree zero.
    pub dangling: usize,
}

impl DsbmGraph {
    /// Samples a dSBM. Each ordered pair `(v, w)`, `v != w`, carries an edge
    /// independently with probability `(a/n) ∧ 1` when the labels agree and
    /// `(b/n) ∧ 1` otherwise. Pure function of `(params, rng_seed)`.
    pub fn generate(params: &ModelParams, rng_seed: u64) -> Result<Self> {
        Self::generate_with(params, rng_seed, SeedPlacement::Prefix)
    }

    pub fn generate_with(
        params: &ModelParams,
        rng_seed: u64,
        placement: SeedPlacement,
    ) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        let half = n / 2;
        let p_within = params.p_within();
        let p_cross = params.p_cross();

        let gen_row = |v: usize| -> Vec<u32> {
            let mut rng = stream(rng_seed, "sbm.edges", v as u64);
            if n <= BERNOULLI_PATH_MAX_N {
                row_bernoulli(v, half, p_within, p_cross, &mut rng)
            } else {
                row_binomial(v, half, p_within, p_cross, &mut rng)
            }
        };

        #[cfg(feature = "parallel")]
        let rows: Vec<Vec<u32>> = {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(gen_row).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<Vec<u32>> = (0..n).map(gen_row).collect();

        let seeds = match placement {
            SeedPlacement::Prefix => (0..params.seed_count() as u32).collect(),
            SeedPlacement::RandomInCommunity1 => {
                let mut rng = stream(rng_seed, "sbm.seeds", 0);
                sample_sorted(half, params.seed_count(), &mut rng)
            }
        };

        Ok(Self::from_rows(n, params.a, params.b, params.s, rng_seed, rows, seeds))
    }

    /// Builds a graph directly from an edge list. Intended for small,
    /// hand-constructed cases; validates every structural invariant.
    pub fn from_parts(
        n: usize,
        a: f64,
        b: f64,
        s: f64,
        rng_seed: u64,
        edges: &[(u32, u32)],
        seeds: &[u32],
    ) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::invalid_params(format!("n must be even and >= 2, got {n}")));
        }
        let half = (n / 2) as u32;
        let mut sorted_edges = edges.to_vec();
        sorted_edges.sort_unstable();
        for pair in sorted_edges.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::invalid_params(format!(
                    "duplicate edge {}->{}",
                    pair[0].0 + 1,
                    pair[0].1 + 1
                )));
            }
        }
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(v, w) in &sorted_edges {
            if v as usize >= n || w as usize >= n {
                return Err(Error::invalid_params(format!(
                    "edge {}->{} out of range for n={n}",
                    v + 1,
                    w + 1
                )));
            }
            if v == w {
                return Err(Error::invalid_params(format!("self-loop at vertex {}", v + 1)));
            }
            rows[v as usize].push(w);
        }
        let mut seeds = seeds.to_vec();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.is_empty() {
            return Err(Error::invalid_params("seed set must be nonempty"));
        }
        if seeds.iter().any(|&v| v >= half) {
            return Err(Error::invalid_params("seeds must lie in community 1"));
        }
        Ok(Self::from_rows(n, a, b, s, rng_seed, rows, seeds))
    }

    fn from_rows(
        n: usize,
        a: f64,
        b: f64,
        s: f64,
        rng_seed: u64,
        rows: Vec<Vec<u32>>,
        seeds: Vec<u32>,
    ) -> Self {
        let m: usize = rows.iter().map(Vec::len).sum();
        let mut out_offsets = Vec::with_capacity(n + 1);
        let mut out_targets = Vec::with_capacity(m);
        let mut in_degrees = vec![0usize; n];
        out_offsets.push(0);
        for row in &rows {
            for &w in row {
                in_degrees[w as usize] += 1;
            }
            out_targets.extend_from_slice(row);
            out_offsets.push(out_targets.len());
        }
        let mut in_offsets = Vec::with_capacity(n + 1);
        in_offsets.push(0);
        for v in 0..n {
            in_offsets.push(in_offsets[v] + in_degrees[v]);
        }
        let mut cursor = in_offsets.clone();
        let mut in_targets = vec![0u32; m];
        // filling in source order keeps every in-neighbor list sorted
        for (v, row) in rows.iter().enumerate() {
            for &w in row {
                in_targets[cursor[w as usize]] = v as u32;
                cursor[w as usize] += 1;
            }
        }
        Self { n, a, b, s, rng_seed, out_offsets, out_targets, in_offsets, in_targets, seeds }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn community_size(&self) -> usize {
        self.n / 2
    }

    pub fn num_edges(&self) -> usize {
        self.out_targets.len()
    }

    pub fn kernel_a(&self) -> f64 {
        self.a
    }

    pub fn kernel_b(&self) -> f64 {
        self.b
    }

    pub fn seed_fraction(&self) -> f64 {
        self.s
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Community label of `v`, 1 or 2.
    pub fn label(&self, v: u32) -> u8 {
        if (v as usize) < self.n / 2 {
            1
        } else {
            2
        }
    }

    pub fn seeds(&self) -> &[u32] {
        &self.seeds
    }

    pub fn is_seed(&self, v: u32) -> bool {
        self.seeds.binary_search(&v).is_ok()
    }

    pub fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.out_targets[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }

    pub fn in_neighbors(&self, v: u32) -> &[u32] {
        &self.in_targets[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]]
    }

    pub fn out_degree(&self, v: u32) -> usize {
        self.out_offsets[v as usize + 1] - self.out_offsets[v as usize]
    }

    pub fn in_degree(&self, v: u32) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    /// Exact per-community degree summary plus the dangling-vertex count.
    pub fn degree_stats(&self) -> DegreeStats {
        let half = self.n / 2;
        let mut community = [CommunityDegrees { mean_out: 0.0, max_out: 0, mean_in: 0.0, max_in: 0 }; 2];
        let mut dangling = 0usize;
        for (i, range) in [(0usize, 0..half), (1, half..self.n)] {
            let mut sum_out = 0usize;
            let mut sum_in = 0usize;
            for v in range.clone() {
                let d_out = self.out_degree(v as u32);
                let d_in = self.in_degree(v as u32);
                sum_out += d_out;
                sum_in += d_in;
                community[i].max_out = community[i].max_out.max(d_out);
                community[i].max_in = community[i].max_in.max(d_in);
                if d_out == 0 {
                    dangling += 1;
                }
            }
            community[i].mean_out = sum_out as f64 / half as f64;
            community[i].mean_in = sum_in as f64 / half as f64;
        }
        DegreeStats { community, dangling }
    }

    /// Writes the edge-list text format:
    /// header `dsbm n a b s rng_seed`, then `label v c`, `edge v w`, `seed v`
    /// lines with 1-based vertex ids.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        writeln!(w, "dsbm {} {} {} {} {}", self.n, self.a, self.b, self.s, self.rng_seed)?;
        let mut line = String::new();
        for v in 0..self.n as u32 {
            line.clear();
            let _ = writeln!(line, "label {} {}", v + 1, self.label(v));
            w.write_all(line.as_bytes())?;
        }
        for v in 0..self.n as u32 {
            for &t in self.out_neighbors(v) {
                line.clear();
                let _ = writeln!(line, "edge {} {}", v + 1, t + 1);
                w.write_all(line.as_bytes())?;
            }
        }
        for &v in &self.seeds {
            line.clear();
            let _ = writeln!(line, "seed {}", v + 1);
            w.write_all(line.as_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`save`](Self::save). Malformed input is
    /// reported with its line number.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let reader = BufReader::new(file);
        let mut lines = reader.lines().enumerate();

        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty file, expected dsbm header"))?;
        let header = header?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "dsbm" {
            return Err(Error::parse(1, "expected header `dsbm n a b s rng_seed`"));
        }
        let n: usize = parse_field(fields[1], 1, "n")?;
        let a: f64 = parse_field(fields[2], 1, "a")?;
        let b: f64 = parse_field(fields[3], 1, "b")?;
        let s: f64 = parse_field(fields[4], 1, "s")?;
        let rng_seed: u64 = parse_field(fields[5], 1, "rng_seed")?;
        if n < 2 || n % 2 != 0 {
            return Err(Error::parse(1, format!("n must be even and >= 2, got {n}")));
        }
        let half = (n / 2) as u32;

        let mut labels_seen = 0usize;
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut seeds: Vec<u32> = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let kind = it.next().unwrap();
            match kind {
                "label" => {
                    let v: u32 = next_field(&mut it, lineno, "vertex")?;
                    let c: u8 = next_field(&mut it, lineno, "community")?;
                    let v0 = check_vertex(v, n, lineno)?;
                    let expected = if v0 < half { 1 } else { 2 };
                    if c != expected {
                        return Err(Error::parse(
                            lineno,
                            format!("vertex {v} carries label {c}, expected {expected} from the canonical layout"),
                        ));
                    }
                    labels_seen += 1;
                }
                "edge" => {
                    let v: u32 = next_field(&mut it, lineno, "source")?;
                    let w: u32 = next_field(&mut it, lineno, "target")?;
                    let v0 = check_vertex(v, n, lineno)?;
                    let w0 = check_vertex(w, n, lineno)?;
                    if v0 == w0 {
                        return Err(Error::parse(lineno, format!("self-loop at vertex {v}")));
                    }
                    edges.push((v0, w0));
                }
                "seed" => {
                    let v: u32 = next_field(&mut it, lineno, "vertex")?;
                    let v0 = check_vertex(v, n, lineno)?;
                    if v0 >= half {
                        return Err(Error::parse(
                            lineno,
                            format!("seed {v} lies outside community 1"),
                        ));
                    }
                    seeds.push(v0);
                }
                other => {
                    return Err(Error::parse(lineno, format!("unknown record `{other}`")));
                }
            }
            if it.next().is_some() {
                return Err(Error::parse(lineno, "trailing fields"));
            }
        }
        if labels_seen != n {
            return Err(Error::parse(
                0,
                format!("expected {n} label lines, found {labels_seen} (file truncated?)"),
            ));
        }
        if seeds.is_empty() {
            return Err(Error::parse(0, "no seed lines (file truncated?)"));
        }
        edges.sort_unstable();
        for pair in edges.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::parse(
                    0,
                    format!("duplicate edge {}->{}", pair[0].0 + 1, pair[0].1 + 1),
                ));
            }
        }
        seeds.sort_unstable();
        seeds.dedup();
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (v, w) in edges {
            rows[v as usize].push(w);
        }
        Ok(Self::from_rows(n, a, b, s, rng_seed, rows, seeds))
    }
}

fn parse_field<T: std::str::FromStr>(text: &str, line: usize, name: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::parse(line, format!("cannot parse {name} from `{text}`")))
}

fn next_field<'a, T: std::str::FromStr>(
    it: &mut impl Iterator<Item = &'a str>,
    line: usize,
    name: &str,
) -> Result<T> {
    let text = it
        .next()
        .ok_or_else(|| Error::parse(line, format!("missing {name} field")))?;
    parse_field(text, line, name)
}

fn check_vertex(v_one_based: u32, n: usize, line: usize) -> Result<u32> {
    if v_one_based == 0 || v_one_based as usize > n {
        return Err(Error::parse(
            line,
            format!("vertex {v_one_based} out of range 1..={n}"),
        ));
    }
    Ok(v_one_based - 1)
}

/// One coin per ordered pair, targets visited in increasing order.
fn row_bernoulli(v: usize, half: usize, p_within: f64, p_cross: f64, rng: &mut impl Rng) -> Vec<u32> {
    let n = 2 * half;
    let same = (v < half) as usize; // 1 when v is community 1
    let mut row = Vec::new();
    for w in 0..n {
        if w == v {
            continue;
        }
        let p = if (w < half) == (same == 1) { p_within } else { p_cross };
        if p >= 1.0 || rng.gen::<f64>() < p {
            row.push(w as u32);
        }
    }
    row
}

/// Binomial count per block, then a uniform k-subset of the block's target
/// positions via sequential selection sampling. Output is sorted.
fn row_binomial(v: usize, half: usize, p_within: f64, p_cross: f64, rng: &mut impl Rng) -> Vec<u32> {
    let in_c1 = v < half;
    let (own_start, other_start) = if in_c1 { (0, half) } else { (half, 0) };
    let own_block = half - 1; // own community excluding v
    let mut row = Vec::new();

    // blocks visited in target-id order so the row comes out sorted
    let mut blocks = [
        (own_start, own_block, p_within, true),
        (other_start, half, p_cross, false),
    ];
    blocks.sort_by_key(|&(start, ..)| start);

    for (start, size, p, skip_self) in blocks {
        let k = draw_binomial(size as u64, p, rng) as usize;
        let self_pos = if skip_self { v - start } else { usize::MAX };
        let mut need = k;
        let mut remaining = size;
        for pos in 0..size {
            if need == 0 {
                break;
            }
            if rng.gen::<f64>() * (remaining as f64) < (need as f64) {
                let mut w = start + pos;
                if skip_self && pos >= self_pos {
                    w += 1;
                }
                row.push(w as u32);
                need -= 1;
            }
            remaining -= 1;
        }
    }
    row
}

fn draw_binomial(n: u64, p: f64, rng: &mut impl Rng) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial parameters").sample(rng)
}

/// Uniform sorted k-subset of `0..m`.
fn sample_sorted(m: usize, k: usize, rng: &mut impl Rng) -> Vec<u32> {
    let mut out = Vec::with_capacity(k);
    let mut need = k.min(m);
    let mut remaining = m;
    for pos in 0..m {
        if need == 0 {
            break;
        }
        if rng.gen::<f64>() * (remaining as f64) < (need as f64) {
            out.push(pos as u32);
            need -= 1;
        }
        remaining -= 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn params(n: usize, a: f64, b: f64, s: f64) -> ModelParams {
        ModelParams::new(n, a, b, s, 0.85).unwrap()
    }

    #[test]
    fn clamped_probability_forces_complete_blocks() {
        let g = DsbmGraph::generate(&params(4, 4.0, 0.0, 0.5), 99).unwrap();
        // a/n = 1 forces both ordered pairs inside each community; b = 0
        // forbids cross edges
        assert_eq!(g.num_edges(), 4);
        assert_eq!(g.out_neighbors(0), &[1]);
        assert_eq!(g.out_neighbors(1), &[0]);
        assert_eq!(g.out_neighbors(2), &[3]);
        assert_eq!(g.out_neighbors(3), &[2]);
        assert_eq!(g.seeds(), &[0]);
    }

    #[test]
    fn figure_one_layout() {
        let g = DsbmGraph::generate(&params(20000, 150.0, 10.0, 0.2), 1).unwrap();
        assert_eq!(g.seeds().len(), 2000);
        assert_eq!(g.seeds()[0], 0);
        assert_eq!(*g.seeds().last().unwrap(), 1999);
        assert_eq!((0..g.n() as u32).filter(|&v| g.label(v) == 1).count(), 10000);
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(600, 12.0, 3.0, 0.25);
        let g1 = DsbmGraph::generate(&p, 77).unwrap();
        let g2 = DsbmGraph::generate(&p, 77).unwrap();
        assert_eq!(g1, g2);
        let g3 = DsbmGraph::generate(&p, 78).unwrap();
        assert_ne!(g1, g3);
    }

    #[test]
    fn adjacency_duality_exhaustive() {
        for n in [50usize, 128, 200] {
            let g = DsbmGraph::generate(&params(n, 8.0, 2.0, 0.3), n as u64).unwrap();
            let mut from_out: Vec<(u32, u32)> = Vec::new();
            let mut from_in: Vec<(u32, u32)> = Vec::new();
            for v in 0..n as u32 {
                for &w in g.out_neighbors(v) {
                    from_out.push((v, w));
                    assert_ne!(v, w, "self-loop");
                }
                for &w in g.in_neighbors(v) {
                    from_in.push((w, v));
                }
            }
            from_out.sort_unstable();
            from_in.sort_unstable();
            assert_eq!(from_out, from_in);
            let dedup: std::collections::BTreeSet<_> = from_out.iter().collect();
            assert_eq!(dedup.len(), from_out.len(), "duplicate edges");
        }
    }

    #[test]
    fn mean_total_degree_matches_kernel() {
        let g = DsbmGraph::generate(&params(10000, 150.0, 10.0, 0.2), 5).unwrap();
        let total: usize = (0..g.n() as u32).map(|v| g.out_degree(v) + g.in_degree(v)).sum();
        let mean = total as f64 / g.n() as f64;
        assert!((mean - 160.0).abs() <= 4.0, "mean total degree {mean}");
    }

    #[test]
    fn per_block_mean_out_degrees() {
        let g = DsbmGraph::generate(&params(10000, 150.0, 10.0, 0.2), 6).unwrap();
        let half = g.community_size();
        let mut within = 0usize;
        let mut cross = 0usize;
        for v in 0..half as u32 {
            for &w in g.out_neighbors(v) {
                if (w as usize) < half {
                    within += 1;
                } else {
                    cross += 1;
                }
            }
        }
        let mean_within = within as f64 / half as f64;
        let mean_cross = cross as f64 / half as f64;
        assert!((mean_within - 75.0).abs() <= 75.0 * 0.05, "within {mean_within}");
        assert!((mean_cross - 5.0).abs() <= 5.0 * 0.05, "cross {mean_cross}");
    }

    #[test]
    fn degree_stats_on_empty_graph() {
        let g = DsbmGraph::generate(&params(100, 0.0, 0.0, 0.5), 3).unwrap();
        let st = g.degree_stats();
        assert_eq!(st.dangling, 100);
        for c in st.community {
            assert_eq!(c.mean_out, 0.0);
            assert_eq!(c.max_in, 0);
        }
    }

    #[test]
    fn degree_stats_on_two_cycle() {
        let g = DsbmGraph::from_parts(2, 0.0, 1.0, 0.5, 0, &[(0, 1), (1, 0)], &[0]).unwrap();
        let st = g.degree_stats();
        assert_eq!(st.dangling, 0);
        for c in st.community {
            assert_eq!(c.mean_out, 1.0);
            assert_eq!(c.mean_in, 1.0);
            assert_eq!(c.max_out, 1);
            assert_eq!(c.max_in, 1);
        }
    }

    #[test]
    fn from_parts_rejects_bad_structure() {
        assert!(DsbmGraph::from_parts(2, 0.0, 1.0, 0.5, 0, &[(0, 0)], &[0]).is_err());
        assert!(DsbmGraph::from_parts(2, 0.0, 1.0, 0.5, 0, &[(0, 1), (0, 1)], &[0]).is_err());
        assert!(DsbmGraph::from_parts(2, 0.0, 1.0, 0.5, 0, &[(0, 3)], &[0]).is_err());
        assert!(DsbmGraph::from_parts(2, 0.0, 1.0, 0.5, 0, &[(0, 1)], &[1]).is_err());
    }

    #[test]
    fn random_seed_placement_stays_in_community_one() {
        let p = params(400, 10.0, 2.0, 0.3);
        let g = DsbmGraph::generate_with(&p, 9, SeedPlacement::RandomInCommunity1).unwrap();
        assert_eq!(g.seeds().len(), p.seed_count());
        assert!(g.seeds().iter().all(|&v| (v as usize) < 200));
        assert!(g.seeds().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn save_load_round_trip_small() {
        let dir = std::env::temp_dir().join(format!("dsbm_rt_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tiny.dsbm");
        let g = DsbmGraph::generate(&params(4, 4.0, 0.0, 0.5), 99).unwrap();
        g.save(&path).unwrap();
        let loaded = DsbmGraph::load(&path).unwrap();
        assert_eq!(g, loaded);
    }

    #[test]
    fn save_load_round_trip_large() {
        let dir = std::env::temp_dir().join(format!("dsbm_rt_large_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("large.dsbm");
        let g = DsbmGraph::generate(&params(20000, 15.0, 1.0, 0.2), 123).unwrap();
        g.save(&path).unwrap();
        let loaded = DsbmGraph::load(&path).unwrap();
        assert_eq!(g, loaded);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let dir = std::env::temp_dir().join(format!("dsbm_trunc_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("trunc.dsbm");
        let g = DsbmGraph::generate(&params(4, 4.0, 0.0, 0.5), 99).unwrap();
        g.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(3).collect::<Vec<_>>().join("\n");
        std::fs::write(&path, cut).unwrap();
        match DsbmGraph::load(&path) {
            Err(Error::Parse { .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        let dir = std::env::temp_dir().join(format!("dsbm_bad_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.dsbm");
        std::fs::write(&path, "dsbm 4 4 0 0.5 99\nlabel 1 1\nlabel nonsense 1\n").unwrap();
        match DsbmGraph::load(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn edge_count_concentration() {
        // mean within-community ordered-pair count over 20 draws stays within
        // 3 sigma of the binomial mean
        let p = params(400, 20.0, 4.0, 0.5);
        let pairs: f64 = 2.0 * 200.0 * 199.0;
        let prob: f64 = 20.0 / 400.0;
        let mean_one = pairs * prob;
        let sd_mean = (pairs * prob * (1.0 - prob) / 20.0).sqrt();
        let mut total = 0usize;
        for seed in 0..20u64 {
            let g = DsbmGraph::generate(&p, 1000 + seed).unwrap();
            let half = g.community_size();
            for v in 0..g.n() as u32 {
                for &w in g.out_neighbors(v) {
                    if ((v as usize) < half) == ((w as usize) < half) {
                        total += 1;
                    }
                }
            }
        }
        let mean = total as f64 / 20.0;
        assert!(
            (mean - mean_one).abs() <= 3.0 * sd_mean,
            "mean {mean} vs expected {mean_one} (sd {sd_mean})"
        );
    }

    #[test]
    fn bernoulli_and_binomial_paths_sample_the_same_distribution() {
        // same-row distributions compared through within/cross edge totals
        let (half, p_within, p_cross) = (150usize, 0.08, 0.015);
        let reps = 400usize;
        let mut totals = [[0f64; 2]; 2]; // [path][within, cross]
        let mut sq = [[0f64; 2]; 2];
        for rep in 0..reps {
            for (path, flip) in [(0usize, false), (1, true)] {
                let mut rng = stream(555, if flip { "bin" } else { "ber" }, rep as u64);
                let row = if flip {
                    row_binomial(0, half, p_within, p_cross, &mut rng)
                } else {
                    row_bernoulli(0, half, p_within, p_cross, &mut rng)
                };
                let within = row.iter().filter(|&&w| (w as usize) < half).count() as f64;
                let cross = row.len() as f64 - within;
                totals[path][0] += within;
                totals[path][1] += cross;
                sq[path][0] += within * within;
                sq[path][1] += cross * cross;
            }
        }
        for k in 0..2 {
            let m0 = totals[0][k] / reps as f64;
            let m1 = totals[1][k] / reps as f64;
            let var0 = sq[0][k] / reps as f64 - m0 * m0;
            let var1 = sq[1][k] / reps as f64 - m1 * m1;
            let se = ((var0 + var1) / reps as f64).sqrt();
            assert!((m0 - m1).abs() <= 4.0 * se, "component {k}: {m0} vs {m1} (se {se})");
            let ratio = (var0 + 1e-9) / (var1 + 1e-9);
            assert!(ratio > 0.6 && ratio < 1.7, "variance ratio {ratio}");
        }
    }
}
