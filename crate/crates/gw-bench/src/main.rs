//! Command-line front end for the solver and the experiment harness.
//!
//! Verbs: `gen`, `solve`, `bench`, `pairwise`, `landmarks`,
//! `trace-plot-data`. Every option has a documented default; where a config
//! file and flags both apply, precedence is explicit and strict: flags beat
//! config-file values, which beat built-in defaults. Nothing merges silently.
//!
//! Exit codes: 0 success; 1 invalid invocation, unreadable input, or solver
//! error on a single run; 2 suite/pairwise jobs finished with partial
//! failures (results for the remaining jobs were still written).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gw_bench::plot::{parse_trace_csv, plot_rows_to_csv};
use gw_bench::suite::aggregates_to_csv;
use gw_bench::{
    greedy_subset, pairwise_matrix, run_method, run_suite, Method, MethodOutcome, RunConfig,
    SuiteConfig,
};
use gw_core::io::float17;
use gw_core::synth::{generate, GeneratorSpec};
use gw_core::{GapMode, GwInstance, PointCloud, SolverConfig};

#[derive(Parser)]
#[command(
    name = "gw-bench",
    version,
    about = "Benchmark harness for the certified Gromov-Wasserstein solver",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a synthetic point cloud and write it to a file.
    Gen(GenArgs),
    /// Solve one instance from two cloud files.
    Solve(SolveArgs),
    /// Run an experiment suite described by a config file.
    Bench(BenchArgs),
    /// Fill the all-pairs GW distance matrix over a set of cloud files.
    Pairwise(PairwiseArgs),
    /// Greedy max-min landmark selection over a set of cloud files.
    Landmarks(LandmarksArgs),
    /// Derive plot-ready columns from a solver trace CSV.
    TracePlotData(TraceArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Family: uniform | normal1 | normal2 | normal3.
    #[arg(long, default_value = "uniform")]
    family: String,
    /// Ambient dimension. Defaults to 2; normal2/normal3 pin it to 3.
    #[arg(long)]
    dim: Option<usize>,
    /// Number of points.
    #[arg(long)]
    n: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Custom Gaussian covariance diagonal, e.g. `1,0.5,0.1`; replaces
    /// --family/--dim.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["family", "dim"])]
    cov: Option<Vec<f64>>,
    /// Output path; a `.json` extension writes JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

/// Solver options shared by the solving verbs. Precedence per field:
/// explicit flag, then the `--config` file, then the built-in default.
#[derive(Args)]
struct SolverFlags {
    /// Solver config file (JSON or TOML); flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gap tolerance, interpreted per --gap-mode [default: 1e-8].
    #[arg(long)]
    epsilon: Option<f64>,
    /// relative | absolute [default: relative].
    #[arg(long)]
    gap_mode: Option<GapMode>,
    /// Iteration cap [default: 10000].
    #[arg(long)]
    max_iters: Option<usize>,
    /// Cover vertex cap [default: 5000000].
    #[arg(long)]
    vertex_cap: Option<usize>,
    /// Per-run wall-clock budget in seconds [default: none].
    #[arg(long)]
    time_limit_s: Option<f64>,
    /// Seed for warm starts and local searches [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Seed the upper bound with one local-search run before cutting.
    #[arg(long)]
    warm_start: bool,
    /// Local-search restarts for method=local [default: 10].
    #[arg(long)]
    starts: Option<usize>,
    /// Iteration cap per local-search run [default: 1000].
    #[arg(long)]
    local_iters: Option<usize>,
}

impl SolverFlags {
    fn resolve(&self) -> Result<RunConfig> {
        let mut solver = match &self.config {
            Some(path) => SolverConfig::load(path)
                .with_context(|| format!("loading solver config {}", path.display()))?,
            None => SolverConfig::default(),
        };
        if let Some(v) = self.epsilon {
            solver.epsilon = v;
        }
        if let Some(v) = self.gap_mode {
            solver.gap_mode = v;
        }
        if let Some(v) = self.max_iters {
            solver.max_iters = v;
        }
        if let Some(v) = self.vertex_cap {
            solver.vertex_cap = v;
        }
        if let Some(v) = self.time_limit_s {
            solver.time_limit_ms = Some(v * 1e3);
        }
        if let Some(v) = self.seed {
            solver.seed = v;
        }
        if self.warm_start {
            solver.warm_start = true;
        }
        solver.validate()?;
        let base = RunConfig::default();
        Ok(RunConfig {
            solver,
            local_starts: self.starts.unwrap_or(base.local_starts),
            local_iters: self.local_iters.unwrap_or(base.local_iters),
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    /// First cloud file (CSV or JSON).
    #[arg(long)]
    x: PathBuf,
    /// Second cloud file.
    #[arg(long)]
    y: PathBuf,
    /// global | local | brute.
    #[arg(long, default_value_t = Method::Global)]
    method: Method,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the iteration trace as CSV (method=global only).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Print the outcome as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite config file (JSON or TOML) listing the experiment cells.
    #[arg(long)]
    config: PathBuf,
    /// Repeats per cell [default: from config, else 5].
    #[arg(long)]
    repeats: Option<usize>,
    /// Comma-separated methods to run [default: from config, else global].
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Base seed for the per-run derivation [default: from config, else 0].
    #[arg(long)]
    base_seed: Option<u64>,
    /// Per-run wall-clock budget in seconds [default: from config, else 600].
    #[arg(long, conflicts_with = "no_time_limit")]
    time_limit_s: Option<f64>,
    /// Remove the per-run time limit entirely.
    #[arg(long)]
    no_time_limit: bool,
    /// Results table, one row per run.
    #[arg(long)]
    out_csv: PathBuf,
    /// Aggregate table (mean/min/max time per cell and method).
    #[arg(long)]
    summary_csv: Option<PathBuf>,
    /// Full report as JSON (rows, aggregates, config, environment).
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Directory for per-run JSON records (re-loadable, re-verifiable).
    #[arg(long)]
    runs_dir: Option<PathBuf>,
    /// Directory for per-run trace CSVs (global method only).
    #[arg(long)]
    traces_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PairwiseArgs {
    /// Cloud files (two or more, all with the same cardinality).
    #[arg(required = true, num_args = 1..)]
    clouds: Vec<PathBuf>,
    /// global | local | brute.
    #[arg(long, default_value_t = Method::Global)]
    method: Method,
    #[command(flatten)]
    solver: SolverFlags,
    /// Distance matrix CSV: n rows of n values, empty cells for failures.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Full report as JSON (matrix, per-pair entries, environment).
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct LandmarksArgs {
    /// Cloud files (all with the same cardinality).
    #[arg(required = true, num_args = 1..)]
    clouds: Vec<PathBuf>,
    /// Number of landmarks to select.
    #[arg(long)]
    k: usize,
    /// global | local | brute.
    #[arg(long, default_value_t = Method::Global)]
    method: Method,
    #[command(flatten)]
    solver: SolverFlags,
    /// Index of the first landmark.
    #[arg(long, default_value_t = 0, conflicts_with = "random_first")]
    first: usize,
    /// Draw the first landmark from the solver seed instead of --first.
    #[arg(long)]
    random_first: bool,
    /// Full report as JSON (picks, cover radii, features).
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Feature matrix CSV: one row per cloud, one column per landmark.
    #[arg(long)]
    features_csv: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    /// Trace CSV produced by `solve --trace-out` or `bench --traces-dir`.
    #[arg(long)]
    trace: PathBuf,
    /// Output CSV with the derived `rel_gap` column.
    #[arg(long)]
    out: PathBuf,
    /// Keep every k-th record; the final record is always kept.
    #[arg(long, default_value_t = 1)]
    every: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; only real errors exit 1.
            let failure = e.use_stderr();
            let _ = e.print();
            return if failure { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Pairwise(args) => cmd_pairwise(args),
        Cmd::Landmarks(args) => cmd_landmarks(args),
        Cmd::TracePlotData(args) => cmd_trace_plot_data(args),
    }
}

fn load_cloud(path: &Path) -> Result<PointCloud> {
    PointCloud::load(path).with_context(|| format!("loading cloud {}", path.display()))
}

fn load_clouds(paths: &[PathBuf]) -> Result<Vec<PointCloud>> {
    paths.iter().map(|p| load_cloud(p)).collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let spec = match args.cov {
        Some(cov) => GeneratorSpec::gaussian(cov, args.n, args.seed),
        None => {
            let spec = GeneratorSpec::from_family(&args.family, args.dim.unwrap_or(2), args.n, args.seed)?;
            if let Some(dim) = args.dim {
                if spec.dim != dim {
                    bail!("family {} pins dimension {}, --dim asked for {dim}", args.family, spec.dim);
                }
            }
            spec
        }
    };
    let cloud = generate(&spec)?;
    cloud.save(&args.out)?;
    println!(
        "wrote {} points (dim {}, {}, seed {}) to {}",
        cloud.len(),
        cloud.dim(),
        spec.label(),
        spec.seed,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let cfg = args.solver.resolve()?;
    let x = load_cloud(&args.x)?;
    let y = load_cloud(&args.y)?;
    let inst = GwInstance::new(x, y)?;
    let outcome = run_method(&inst, args.method, &cfg)?;

    if let Some(path) = &args.trace_out {
        match &outcome.trace {
            Some(trace) => write_text(path, &trace.to_csv_string())?,
            None => bail!("--trace-out needs method=global; {} has no trace", args.method),
        }
    }

    if args.json {
        println!("{}", serde_json::to_string_pretty(&outcome)?);
    } else {
        print_outcome(&inst, args.method, &outcome);
    }
    Ok(ExitCode::SUCCESS)
}

fn print_outcome(inst: &GwInstance, method: Method, out: &MethodOutcome) {
    println!("value   {}", float17(out.value));
    match out.lower {
        Some(lower) => {
            let gap = out.value - lower;
            println!(
                "lower   {}   (gap {:.3e}, relative {:.3e})",
                float17(lower),
                gap,
                gw_core::solver::relative_gap(lower, out.value)
            );
        }
        None => println!("lower   none (local search carries no certificate)"),
    }
    let unit = match method {
        Method::Global => "iterations",
        Method::Local => "starts",
        Method::Brute => "permutations",
    };
    println!(
        "status  {}   {} {}   time {:.1} ms",
        out.status, unit, out.iters, out.time_ms
    );
    if inst.n() <= 24 {
        let map: Vec<String> = out.assignment.iter().map(|j| j.to_string()).collect();
        println!("assignment {}", map.join(" "));
    }
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let mut cfg = SuiteConfig::load(&args.config)
        .with_context(|| format!("loading suite config {}", args.config.display()))?;
    if let Some(v) = args.repeats {
        cfg.repeats = v;
    }
    if let Some(v) = &args.methods {
        cfg.methods = v.clone();
    }
    if let Some(v) = args.base_seed {
        cfg.base_seed = v;
    }
    if let Some(v) = args.time_limit_s {
        cfg.time_limit_ms = Some(v * 1e3);
    }
    if args.no_time_limit {
        cfg.time_limit_ms = None;
    }

    let out = run_suite(&cfg)?;
    let report = &out.report;

    write_text(&args.out_csv, &report.to_csv_string())?;
    if let Some(path) = &args.summary_csv {
        write_text(path, &aggregates_to_csv(&report.aggregates))?;
    }
    if let Some(path) = &args.out_json {
        write_text(path, &report.to_json_string())?;
    }
    if let Some(dir) = &args.runs_dir {
        std::fs::create_dir_all(dir)?;
        for (row, record) in report.rows.iter().zip(&out.runs) {
            if let Some(record) = record {
                record.save(&dir.join(run_stem(row) + ".json"))?;
            }
        }
    }
    if let Some(dir) = &args.traces_dir {
        std::fs::create_dir_all(dir)?;
        for (row, record) in report.rows.iter().zip(&out.runs) {
            if let Some(trace) = record.as_ref().and_then(|r| r.outcome.trace.as_ref()) {
                write_text(&dir.join(run_stem(row) + ".csv"), &trace.to_csv_string())?;
            }
        }
    }

    for agg in &report.aggregates {
        println!("{}", agg.headline());
    }
    let total = report.rows.len();
    if report.failures > 0 {
        eprintln!("{} of {total} runs failed; see the status column", report.failures);
        return Ok(ExitCode::from(2));
    }
    println!("{total} runs, all succeeded; results in {}", args.out_csv.display());
    Ok(ExitCode::SUCCESS)
}

/// File stem identifying a run inside --runs-dir/--traces-dir.
fn run_stem(row: &gw_bench::ResultRow) -> String {
    format!(
        "run-{}-n{}-d{}{}-{}-seed{}",
        row.family, row.n, row.lx, row.ly, row.method, row.seed
    )
}

fn cmd_pairwise(args: PairwiseArgs) -> Result<ExitCode> {
    let cfg = args.solver.resolve()?;
    let clouds = load_clouds(&args.clouds)?;
    let report = pairwise_matrix(&clouds, args.method, &cfg)?;

    if let Some(path) = &args.out_csv {
        write_text(path, &report.matrix_to_csv())?;
    }
    if let Some(path) = &args.out_json {
        write_text(path, &report.to_json_string())?;
    }

    let pairs = report.entries.len();
    if report.failures > 0 {
        eprintln!("{} of {pairs} pairs failed; their matrix entries are empty", report.failures);
        return Ok(ExitCode::from(2));
    }
    println!(
        "{} clouds, {pairs} pairs solved with method={}",
        report.n_clouds, report.method
    );
    if args.out_csv.is_none() && args.out_json.is_none() {
        print!("{}", report.matrix_to_csv());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_landmarks(args: LandmarksArgs) -> Result<ExitCode> {
    let cfg = args.solver.resolve()?;
    let clouds = load_clouds(&args.clouds)?;
    let first = if args.random_first {
        ChaCha8Rng::seed_from_u64(cfg.solver.seed).random_range(0..clouds.len())
    } else {
        args.first
    };
    let report = greedy_subset(&clouds, args.k, first, args.method, &cfg)?;

    if let Some(path) = &args.out_json {
        write_text(path, &report.to_json_string())?;
    }
    if let Some(path) = &args.features_csv {
        write_text(path, &report.features_to_csv())?;
    }

    let picks: Vec<String> = report.selected.iter().map(|i| i.to_string()).collect();
    println!("selected  {}", picks.join(" "));
    let radii: Vec<String> = report.cover_radius.iter().map(|r| format!("{r:.6e}")).collect();
    println!("cover radius  {}", radii.join(" "));
    Ok(ExitCode::SUCCESS)
}

fn cmd_trace_plot_data(args: TraceArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.trace)
        .with_context(|| format!("reading trace {}", args.trace.display()))?;
    let rows = parse_trace_csv(&text)?;
    let out = plot_rows_to_csv(&rows, args.every)?;
    write_text(&args.out, &out)?;
    println!(
        "{} of {} trace rows written to {}",
        out.lines().count() - 1,
        rows.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
