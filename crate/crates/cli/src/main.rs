//! `prnibble`: PageRank Nibble community recovery on the two-community
//! directed stochastic block model.
//!
//! Exit codes: 0 on success, 2 on validation/input errors, 3 when a PageRank
//! run fails to converge within its iteration budget.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use prnibble::dist::EmpiricalDist;
use prnibble::experiment::{self, ExperimentConfig, ExperimentMode};
use prnibble::gw::{self, FpParams};
use prnibble::nibble;
use prnibble::pagerank::{
    personalized_pagerank, DanglingMode, PagerankOptions, PagerankResult, Personalization,
};
use prnibble::params::ModelParams;
use prnibble::report::Table;
use prnibble::sbm::{DsbmGraph, SeedPlacement};
use prnibble::theory;
use prnibble::{Error, Result};

#[derive(Parser)]
#[command(
    name = "prnibble",
    about = "PageRank Nibble community recovery on the sparse directed stochastic block model",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a two-community dSBM and write it as an edge-list file.
    Generate(GenerateArgs),
    /// Compute personalized scale-free PageRank on a stored graph.
    Pagerank(PagerankArgs),
    /// Threshold PageRank scores into a community-1 prediction and score it.
    Classify(ClassifyArgs),
    /// Evaluate every closed-form limit quantity at one point or on a damping grid.
    Theory(TheoryArgs),
    /// Monte Carlo samples of the limiting per-community PageRank laws.
    SampleFp(SampleFpArgs),
    /// Run a fixed experiment pipeline with seeded replications.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 1)]
    rng_seed: u64,
    /// Choose seeds uniformly inside community 1 instead of the first
    /// `round(s n/2)` vertices.
    #[arg(long)]
    random_seeds: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PersonalizationMode {
    Seeds,
    Uniform,
    File,
}

#[derive(Args)]
struct PagerankArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    c: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "seeds")]
    personalization: PersonalizationMode,
    /// Per-vertex weights, one number per line; required with
    /// `--personalization file`.
    #[arg(long)]
    personalization_file: Option<PathBuf>,
    /// Redirect dangling mass to the personalization instead of leaking it.
    #[arg(long)]
    restart_dangling: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    c: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Threshold: a number, or `auto` for 5s/8.
    #[arg(long, default_value = "auto")]
    x0: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0.85)]
    c: f64,
    /// Damping grid `c=LO:HI:STEP`; emits one row per grid point.
    #[arg(long)]
    grid: Option<String>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CommunityArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Args)]
struct SampleFpArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0.85)]
    c: f64,
    #[arg(long, default_value_t = 100_000)]
    n_samples: usize,
    /// Truncation tolerance; sets the recursion depth.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value = "both")]
    community: CommunityArg,
    #[arg(long, default_value_t = 7)]
    rng_seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// figure1 | figure2 | convergence | bounds
    mode: String,
    /// Flat `key = value` config file; flags win over file entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Repeatable `key=value` override, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Generate(args) => cmd_generate(args),
        Command::Pagerank(args) => cmd_pagerank(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Theory(args) => cmd_theory(args),
        Command::SampleFp(args) => cmd_sample_fp(args),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    // damping is irrelevant for sampling the graph; any valid value passes
    let params = ModelParams::new(args.n, args.a, args.b, args.s, 0.85)?;
    let placement =
        if args.random_seeds { SeedPlacement::RandomInCommunity1 } else { SeedPlacement::Prefix };
    let g = DsbmGraph::generate_with(&params, args.rng_seed, placement)?;
    g.save(&args.out)?;
    let st = g.degree_stats();
    println!(
        "wrote {} ({} vertices, {} edges, {} seeds, {} dangling)",
        args.out.display(),
        g.n(),
        g.num_edges(),
        g.seeds().len(),
        st.dangling
    );
    Ok(ExitCode::SUCCESS)
}

fn scores_table(g: &DsbmGraph, result: &PagerankResult) -> Table {
    let mut t = Table::new(&["v", "label", "is_seed", "R"]);
    for v in 0..g.n() as u32 {
        t.push_row(vec![
            (v + 1) as f64,
            g.label(v) as f64,
            g.is_seed(v) as u8 as f64,
            result.scores[v as usize],
        ]);
    }
    t
}

fn cmd_pagerank(args: PagerankArgs) -> Result<ExitCode> {
    let g = DsbmGraph::load(&args.graph)?;
    let q = match args.personalization {
        PersonalizationMode::Seeds => Personalization::seeds(&g),
        PersonalizationMode::Uniform => Personalization::uniform(g.n()),
        PersonalizationMode::File => {
            let path = args.personalization_file.ok_or_else(|| {
                Error::InvalidParams(
                    "--personalization file requires --personalization-file".into(),
                )
            })?;
            let text = std::fs::read_to_string(path)?;
            let weights = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| {
                    l.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line: i + 1,
                        msg: format!("cannot parse weight `{}`", l.trim()),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            Personalization::from_weights(weights)?
        }
    };
    let opts = PagerankOptions {
        c: args.c,
        tol: args.tol,
        max_iter: args.max_iter,
        dangling: if args.restart_dangling {
            DanglingMode::RestartToPersonalization
        } else {
            DanglingMode::Leak
        },
    };
    let result = personalized_pagerank(&g, &q, &opts)?;
    scores_table(&g, &result).save(&args.out)?;
    println!(
        "{} sweeps, residual {:.3e}, wrote {}",
        result.iterations,
        result.residual,
        args.out.display()
    );
    if !result.converged {
        eprintln!(
            "did not converge to tol {} within {} sweeps (residual {:.3e})",
            args.tol, args.max_iter, result.residual
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode> {
    let g = DsbmGraph::load(&args.graph)?;
    let x0 = match args.x0.as_str() {
        "auto" => 5.0 * g.seed_fraction() / 8.0,
        text => text
            .parse::<f64>()
            .map_err(|_| Error::InvalidParams(format!("x0 must be a number or `auto`, got `{text}`")))?,
    };
    let q = Personalization::seeds(&g);
    let opts = PagerankOptions {
        c: args.c,
        tol: args.tol,
        max_iter: args.max_iter,
        ..Default::default()
    };
    let result = personalized_pagerank(&g, &q, &opts)?;
    let cls = nibble::classify(&result, &g, x0)?;
    let mut t = Table::new(&["x0", "tp", "fp", "tn", "fn", "sym_diff", "misclass_c1", "misclass_c2"]);
    t.push_row(vec![
        x0,
        cls.all.true_pos as f64,
        cls.all.false_pos as f64,
        cls.all.true_neg as f64,
        cls.all.false_neg as f64,
        cls.sym_diff as f64,
        cls.misclass_c1(&g),
        cls.misclass_c2(&g),
    ]);
    t.save(&args.out)?;
    println!(
        "x0 = {x0}: predicted |C1| = {}, sym_diff = {}, wrote {}",
        cls.predicted_c1.len(),
        cls.sym_diff,
        args.out.display()
    );
    if !result.converged {
        eprintln!("pagerank did not converge (residual {:.3e})", result.residual);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

const THEORY_COLUMNS: &[&str] = &[
    "a", "b", "s", "c", "lambda", "delta_det", "r1", "r2", "r1_hat", "inv_sq_moment", "g1", "g2",
    "v1", "v2", "v1_bound", "v2_bound", "delta1", "delta2", "second_eig", "c_star", "x0_star",
    "r1_lower", "r2_upper", "mean_bounds_ok", "misclass_bounds_ok", "vacuous",
];

fn theory_row(t: &theory::TheoryStats) -> Vec<f64> {
    vec![
        t.a,
        t.b,
        t.s,
        t.c,
        t.lambda,
        t.delta_det,
        t.r1,
        t.r2,
        t.r1_hat,
        t.inv_sq_moment,
        t.g1,
        t.g2,
        t.v1,
        t.v2,
        t.v1_bound,
        t.v2_bound,
        t.delta1,
        t.delta2,
        t.second_eig,
        t.c_star,
        t.x0_star,
        t.r1_lower,
        t.r2_upper,
        t.mean_bounds_ok as u8 as f64,
        t.misclass_bounds_ok as u8 as f64,
        t.vacuous as u8 as f64,
    ]
}

fn parse_grid(text: &str) -> Result<(f64, f64, f64)> {
    let body = text.strip_prefix("c=").unwrap_or(text);
    let parts: Vec<&str> = body.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParams(format!("grid must be `c=LO:HI:STEP`, got `{text}`")));
    }
    let parse = |t: &str| {
        t.parse::<f64>().map_err(|_| Error::InvalidParams(format!("bad grid number `{t}`")))
    };
    let (lo, hi, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if !(lo > 0.0 && hi < 1.0 && lo <= hi && step > 0.0) {
        return Err(Error::InvalidParams(format!("grid out of range: {lo}:{hi}:{step}")));
    }
    Ok((lo, hi, step))
}

fn cmd_theory(args: TheoryArgs) -> Result<ExitCode> {
    let mut table = Table::new(THEORY_COLUMNS);
    match &args.grid {
        None => {
            let t = theory::evaluate(args.a, args.b, args.s, args.c)?;
            table.push_row(theory_row(&t));
        }
        Some(spec) => {
            let (lo, hi, step) = parse_grid(spec)?;
            let mut c = lo;
            while c <= hi + 1e-12 {
                let t = theory::evaluate(args.a, args.b, args.s, c.min(hi))?;
                table.push_row(theory_row(&t));
                c += step;
            }
        }
    }
    match &args.out {
        Some(path) => {
            table.save(path)?;
            println!("wrote {} ({} rows)", path.display(), table.len());
        }
        None => print!("{}", table.to_csv_string()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample_fp(args: SampleFpArgs) -> Result<ExitCode> {
    let fp = FpParams::with_tolerance(
        args.a,
        args.b,
        args.s,
        args.c,
        args.tol,
        args.n_samples,
        args.rng_seed,
    )?;
    let (d1, d2) = gw::sample_both(&fp)?;
    let keep: Vec<&EmpiricalDist> = match args.community {
        CommunityArg::One => vec![&d1],
        CommunityArg::Two => vec![&d2],
        CommunityArg::Both => vec![&d1, &d2],
    };
    let mut table = Table::new(&["community", "value"]);
    for dist in &keep {
        for &x in dist.samples() {
            table.push_row(vec![dist.community() as f64, x]);
        }
    }
    table.save(&args.out)?;

    let mut summary = BTreeMap::new();
    summary.insert("depth".to_string(), serde_json::json!(fp.depth));
    summary.insert("truncation_bound".to_string(), serde_json::json!(gw::truncation_bound(args.c, fp.depth)));
    summary.insert("n_samples".to_string(), serde_json::json!(args.n_samples));
    for dist in &keep {
        summary.insert(
            format!("community{}", dist.community()),
            serde_json::json!({ "mean": dist.mean(), "var": dist.variance() }),
        );
    }
    let summary_path = args.out.with_extension("summary.json");
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary)
            .map_err(|e| Error::InvalidParams(format!("summary serialization failed: {e}")))?
            + "\n",
    )?;
    println!(
        "wrote {} ({} samples/community, depth {}) and {}",
        args.out.display(),
        args.n_samples,
        fp.depth,
        summary_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let mode: ExperimentMode = args.mode.parse()?;
    let mut cfg = ExperimentConfig::defaults(mode);
    if let Some(path) = &args.config {
        let pairs = experiment::read_config_file(path)?;
        cfg.apply_kv(&pairs)?;
    }
    let mut overrides: Vec<(String, String)> = Vec::new();
    for set in &args.sets {
        let (k, v) = set.split_once('=').ok_or_else(|| {
            Error::InvalidParams(format!("--set expects KEY=VALUE, got `{set}`"))
        })?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(dir) = &args.out_dir {
        overrides.push(("output_dir".into(), dir.display().to_string()));
    }
    if let Some(seed) = args.rng_seed {
        overrides.push(("rng_seed".into(), seed.to_string()));
    }
    if let Some(reps) = args.replications {
        overrides.push(("replications".into(), reps.to_string()));
    }
    cfg.apply_kv(&overrides)?;
    cfg.mode = mode;

    let report = experiment::run(&cfg)?;
    println!(
        "{}: {} rows -> {}",
        mode.name(),
        report.rows.len(),
        cfg.output_dir.join("rows.csv").display()
    );
    for (k, v) in &report.summary.metrics {
        println!("  {k} = {v}");
    }
    for note in &report.summary.notes {
        println!("  note: {note}");
    }
    let non_converged = report.summary.metrics.get("non_converged").copied().unwrap_or(0.0);
    if non_converged > 0.0 {
        eprintln!("{non_converged} replication(s) did not converge");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}
