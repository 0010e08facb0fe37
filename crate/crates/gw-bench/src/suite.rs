//! Suite driver: a config lists experiment cells (family, size, dimensions,
//! tolerance); each cell runs a configurable number of seeded repeats per
//! method. Jobs are independent and run across the worker pool; rows are
//! keyed and sorted before aggregation so the output is deterministic in
//! content no matter the schedule. Per-run failures become `error` rows and
//! the suite continues.

use std::path::Path;

use gw_core::io::float17;
use gw_core::synth::GeneratorSpec;
use gw_core::{GapMode, GwError, GwInstance, Result, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::method::{run_method, Method, RunConfig};
use crate::run::{BenchmarkRun, EnvMeta};
use crate::SCHEMA_VERSION;

/// Fixed column set of the results table.
pub const RESULT_COLUMNS: &str = "type,n,lx,ly,eps,method,seed,value,lower,time_ms,iters,status";

/// One experiment cell: a generator family at a size/dimension pair, solved
/// to a target tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    /// Family name: `uniform` | `normal1` | `normal2` | `normal3`.
    pub family: String,
    pub n: usize,
    pub dim_x: usize,
    pub dim_y: usize,
    pub epsilon: f64,
    #[serde(default)]
    pub gap_mode: GapMode,
}

impl CellSpec {
    /// Generator specs for repeat seeds `(seed_x, seed_y)`.
    pub fn specs(&self, seed_x: u64, seed_y: u64) -> Result<(GeneratorSpec, GeneratorSpec)> {
        let x = GeneratorSpec::from_family(&self.family, self.dim_x, self.n, seed_x)?;
        let y = GeneratorSpec::from_family(&self.family, self.dim_y, self.n, seed_y)?;
        for (spec, want) in [(&x, self.dim_x), (&y, self.dim_y)] {
            if spec.dim != want {
                return Err(GwError::InvalidArgument(format!(
                    "family {} pins dimension {}, cell asks for {want}",
                    self.family, spec.dim
                )));
            }
        }
        Ok((x, y))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(GwError::InvalidArgument(format!(
                "cell epsilon must be finite and nonnegative, got {}",
                self.epsilon
            )));
        }
        self.specs(0, 1).map(|_| ())
    }
}

/// Full suite description. Every field has a default, so config files only
/// need to spell out what they change; `cells` is the one field a useful
/// suite must provide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    /// Seeded repeats per cell and method.
    pub repeats: usize,
    /// Base of the per-run seed derivation (see [`SuiteConfig::pair_seeds`]).
    pub base_seed: u64,
    /// Methods run on every cell; an empty list yields an empty table.
    pub methods: Vec<Method>,
    /// Per-run wall-clock budget; `None` disables the limit.
    pub time_limit_ms: Option<f64>,
    /// Restarts per local-search run.
    pub local_starts: usize,
    /// Iteration cap per local-search run.
    pub local_iters: usize,
    /// Warm-start the global solver's upper bound.
    pub warm_start: bool,
    pub cells: Vec<CellSpec>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            repeats: 5,
            base_seed: 0,
            methods: vec![Method::Global],
            time_limit_ms: Some(600_000.0),
            local_starts: 10,
            local_iters: 1000,
            warm_start: false,
            cells: Vec::new(),
        }
    }
}

impl SuiteConfig {
    /// Seeds for cell `c`, repeat `k`: the x cloud draws from
    /// `base + 1000*c + 2*k`, the y cloud from its successor. Cells are
    /// 1000 seeds apart, so no two runs of a suite share a generator stream.
    #[must_use]
    pub fn pair_seeds(&self, cell: usize, repeat: usize) -> (u64, u64) {
        let s = self.base_seed + 1000 * cell as u64 + 2 * repeat as u64;
        (s, s + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(GwError::InvalidArgument("repeats must be at least 1".into()));
        }
        if self.repeats > 500 {
            return Err(GwError::InvalidArgument(
                "more than 500 repeats would overlap the next cell's seed range".into(),
            ));
        }
        if self.local_starts == 0 || self.local_iters == 0 {
            return Err(GwError::InvalidArgument(
                "local_starts and local_iters must be at least 1".into(),
            ));
        }
        self.cells.iter().try_for_each(CellSpec::validate)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: SuiteConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SuiteConfig =
            toml::from_str(s).map_err(|e| GwError::Parse(format!("suite TOML: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file, dispatching on the `.json` / `.toml` extension.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    /// The run configuration a given cell induces. The solver seed is the
    /// x-cloud seed so warm starts and local searches are pinned per run.
    #[must_use]
    pub fn run_config(&self, cell: &CellSpec, seed_x: u64) -> RunConfig {
        RunConfig {
            solver: SolverConfig {
                epsilon: cell.epsilon,
                gap_mode: cell.gap_mode,
                time_limit_ms: self.time_limit_ms,
                warm_start: self.warm_start,
                seed: seed_x,
                ..SolverConfig::default()
            },
            local_starts: self.local_starts,
            local_iters: self.local_iters,
        }
    }
}

/// One results-table row. `seed` is the x-cloud seed; the y cloud uses
/// `seed + 1`. A failed run keeps its row with empty value/lower, status
/// `error`, and the message tucked into `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub family: String,
    pub n: usize,
    pub lx: usize,
    pub ly: usize,
    pub eps: f64,
    pub method: Method,
    pub seed: u64,
    pub value: Option<f64>,
    pub lower: Option<f64>,
    pub time_ms: f64,
    pub iters: usize,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultRow {
    /// CSV cells in [`RESULT_COLUMNS`] order.
    #[must_use]
    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(float17).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.n,
            self.lx,
            self.ly,
            float17(self.eps),
            self.method,
            self.seed,
            opt(self.value),
            opt(self.lower),
            float17(self.time_ms),
            self.iters,
            self.status
        )
    }
}

/// Renders the fixed-column results table.
#[must_use]
pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_COLUMNS);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Per-cell/method summary in the paper's `mean (min - max)` timing shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub family: String,
    pub n: usize,
    pub lx: usize,
    pub ly: usize,
    pub eps: f64,
    pub method: Method,
    pub runs: usize,
    pub failures: usize,
    pub time_ms_mean: f64,
    pub time_ms_min: f64,
    pub time_ms_max: f64,
    /// Values of the successful runs, in repeat order.
    pub values: Vec<f64>,
    /// Status per repeat, in repeat order.
    pub statuses: Vec<String>,
}

impl CellAggregate {
    /// One-line human summary, `mean (min - max)` in milliseconds.
    #[must_use]
    pub fn headline(&self) -> String {
        format!(
            "{} n={} ({},{}) eps={:.0e} {}: {} runs, time {:.1} ms ({:.1} - {:.1}), {}",
            self.family,
            self.n,
            self.lx,
            self.ly,
            self.eps,
            self.method,
            self.runs,
            self.time_ms_mean,
            self.time_ms_min,
            self.time_ms_max,
            if self.failures == 0 {
                format!("statuses [{}]", self.statuses.join(", "))
            } else {
                format!("{} FAILED", self.failures)
            }
        )
    }
}

/// Renders the aggregate table.
#[must_use]
pub fn aggregates_to_csv(aggs: &[CellAggregate]) -> String {
    let mut out = String::from(
        "type,n,lx,ly,eps,method,runs,failures,time_ms_mean,time_ms_min,time_ms_max\n",
    );
    for a in aggs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            a.family,
            a.n,
            a.lx,
            a.ly,
            float17(a.eps),
            a.method,
            a.runs,
            a.failures,
            float17(a.time_ms_mean),
            float17(a.time_ms_min),
            float17(a.time_ms_max),
        ));
    }
    out
}

/// Everything a suite run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub config: SuiteConfig,
    pub environment: EnvMeta,
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<CellAggregate>,
    pub failures: usize,
}

impl SuiteReport {
    #[must_use]
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    #[must_use]
    pub fn to_csv_string(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

/// A suite run's report plus the re-verifiable per-run records, aligned with
/// `report.rows` (failed rows have no record).
#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub report: SuiteReport,
    pub runs: Vec<Option<BenchmarkRun>>,
}

struct Job {
    cell_idx: usize,
    method_idx: usize,
    repeat: usize,
    cell: CellSpec,
    method: Method,
    seed_x: u64,
    seed_y: u64,
}

/// Runs every (cell, method, repeat) job and aggregates deterministically.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    cfg.validate()?;
    let jobs: Vec<Job> = cfg
        .cells
        .iter()
        .enumerate()
        .flat_map(|(cell_idx, cell)| {
            cfg.methods.iter().enumerate().flat_map(move |(method_idx, &method)| {
                (0..cfg.repeats).map(move |repeat| {
                    let (seed_x, seed_y) = cfg.pair_seeds(cell_idx, repeat);
                    Job {
                        cell_idx,
                        method_idx,
                        repeat,
                        cell: cell.clone(),
                        method,
                        seed_x,
                        seed_y,
                    }
                })
            })
        })
        .collect();

    let run_one = |job: &Job| -> (ResultRow, Option<BenchmarkRun>) {
        let run_cfg = cfg.run_config(&job.cell, job.seed_x);
        let mut row = ResultRow {
            family: job.cell.family.clone(),
            n: job.cell.n,
            lx: job.cell.dim_x,
            ly: job.cell.dim_y,
            eps: job.cell.epsilon,
            method: job.method,
            seed: job.seed_x,
            value: None,
            lower: None,
            time_ms: 0.0,
            iters: 0,
            status: "error".into(),
            error: None,
        };
        let attempt = || -> Result<(BenchmarkRun, ResultRow)> {
            let (spec_x, spec_y) = job.cell.specs(job.seed_x, job.seed_y)?;
            let x = gw_core::synth::generate(&spec_x)?;
            let y = gw_core::synth::generate(&spec_y)?;
            let inst = GwInstance::new(x, y)?;
            let outcome = run_method(&inst, job.method, &run_cfg)?;
            let mut done = row.clone();
            done.value = Some(outcome.value);
            done.lower = outcome.lower;
            done.time_ms = outcome.time_ms;
            done.iters = outcome.iters;
            done.status = outcome.status.clone();
            done.error = None;
            let record = BenchmarkRun::new(spec_x, spec_y, job.method, run_cfg, outcome);
            Ok((record, done))
        };
        match attempt() {
            Ok((record, done)) => (done, Some(record)),
            Err(e) => {
                row.error = Some(e.to_string());
                (row, None)
            }
        }
    };

    #[cfg(feature = "parallel")]
    let mut keyed: Vec<((usize, usize, usize), (ResultRow, Option<BenchmarkRun>))> = {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|j| ((j.cell_idx, j.method_idx, j.repeat), run_one(j)))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut keyed: Vec<((usize, usize, usize), (ResultRow, Option<BenchmarkRun>))> = jobs
        .iter()
        .map(|j| ((j.cell_idx, j.method_idx, j.repeat), run_one(j)))
        .collect();

    keyed.sort_by_key(|(key, _)| *key);

    let mut rows = Vec::with_capacity(keyed.len());
    let mut runs = Vec::with_capacity(keyed.len());
    let mut aggregates: Vec<CellAggregate> = Vec::new();
    for ((cell_idx, method_idx, _), (row, record)) in keyed {
        let cell = &cfg.cells[cell_idx];
        let fresh = aggregates.len() < cell_idx * cfg.methods.len() + method_idx + 1;
        if fresh {
            aggregates.push(CellAggregate {
                family: cell.family.clone(),
                n: cell.n,
                lx: cell.dim_x,
                ly: cell.dim_y,
                eps: cell.epsilon,
                method: row.method,
                runs: 0,
                failures: 0,
                time_ms_mean: 0.0,
                time_ms_min: f64::INFINITY,
                time_ms_max: f64::NEG_INFINITY,
                values: Vec::new(),
                statuses: Vec::new(),
            });
        }
        let agg = aggregates.last_mut().expect("just ensured");
        agg.runs += 1;
        agg.statuses.push(row.status.clone());
        match row.value {
            Some(v) => {
                agg.values.push(v);
                agg.time_ms_mean += row.time_ms;
                agg.time_ms_min = agg.time_ms_min.min(row.time_ms);
                agg.time_ms_max = agg.time_ms_max.max(row.time_ms);
            }
            None => agg.failures += 1,
        }
        rows.push(row);
        runs.push(record);
    }
    for agg in &mut aggregates {
        let ok = agg.runs - agg.failures;
        if ok > 0 {
            agg.time_ms_mean /= ok as f64;
        } else {
            agg.time_ms_mean = f64::NAN;
            agg.time_ms_min = f64::NAN;
            agg.time_ms_max = f64::NAN;
        }
    }
    let failures = aggregates.iter().map(|a| a.failures).sum();

    Ok(SuiteOutput {
        report: SuiteReport {
            schema_version: SCHEMA_VERSION,
            config: cfg.clone(),
            environment: EnvMeta::capture(),
            rows,
            aggregates,
            failures,
        },
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> SuiteConfig {
        SuiteConfig {
            repeats: 2,
            methods: vec![Method::Global, Method::Brute],
            cells: vec![
                CellSpec {
                    family: "uniform".into(),
                    n: 5,
                    dim_x: 2,
                    dim_y: 2,
                    epsilon: 1e-8,
                    gap_mode: GapMode::Relative,
                },
                CellSpec {
                    family: "normal1".into(),
                    n: 4,
                    dim_x: 1,
                    dim_y: 2,
                    epsilon: 1e-8,
                    gap_mode: GapMode::Relative,
                },
            ],
            ..SuiteConfig::default()
        }
    }

    /// The results CSV with the volatile timing column blanked.
    fn stable_csv(report: &SuiteReport) -> String {
        report
            .to_csv_string()
            .lines()
            .map(|line| {
                let mut cells: Vec<&str> = line.split(',').collect();
                if cells.len() == 12 && cells[9] != "time_ms" {
                    cells[9] = "-";
                }
                cells.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn defaults_match_contract() {
        let cfg = SuiteConfig::default();
        assert_eq!(cfg.repeats, 5);
        assert_eq!(cfg.methods, vec![Method::Global]);
        assert_eq!(cfg.time_limit_ms, Some(600_000.0));
        assert!(cfg.cells.is_empty());
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn pair_seeds_never_collide() {
        let cfg = SuiteConfig::default();
        let mut seen = std::collections::HashSet::new();
        for cell in 0..4 {
            for repeat in 0..cfg.repeats {
                let (sx, sy) = cfg.pair_seeds(cell, repeat);
                assert_eq!(sy, sx + 1);
                assert!(seen.insert(sx), "seed {sx} reused");
                assert!(seen.insert(sy), "seed {sy} reused");
            }
        }
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = tiny_config();
        cfg.repeats = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.cells[0].family = "lattice".into();
        assert!(cfg.validate().is_err());

        // normal3 pins the dimension to 3.
        let mut cfg = tiny_config();
        cfg.cells[0].family = "normal3".into();
        cfg.cells[0].dim_x = 2;
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.cells[0].epsilon = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_parses_from_toml_and_json() {
        let toml_text = r#"
            repeats = 3
            methods = ["global", "local"]
            warm_start = true

            [[cells]]
            family = "uniform"
            n = 10
            dim_x = 2
            dim_y = 2
            epsilon = 1e-6
        "#;
        let cfg = SuiteConfig::from_toml_str(toml_text).unwrap();
        assert_eq!(cfg.repeats, 3);
        assert_eq!(cfg.methods, vec![Method::Global, Method::Local]);
        assert!(cfg.warm_start);
        assert_eq!(cfg.cells.len(), 1);
        assert_eq!(cfg.cells[0].gap_mode, GapMode::Relative);

        let json_text = serde_json::to_string(&cfg).unwrap();
        let back = SuiteConfig::from_json_str(&json_text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn suite_runs_and_global_matches_brute() {
        let cfg = tiny_config();
        let out = run_suite(&cfg).unwrap();
        let report = &out.report;
        // 2 cells x 2 methods x 2 repeats
        assert_eq!(report.rows.len(), 8);
        assert_eq!(report.failures, 0);
        assert_eq!(out.runs.iter().filter(|r| r.is_some()).count(), 8);

        // Rows are keyed (cell, method, repeat) in declaration order.
        let key: Vec<(usize, Method, u64)> = report
            .rows
            .iter()
            .map(|r| (r.n, r.method, r.seed))
            .collect();
        assert_eq!(
            key,
            vec![
                (5, Method::Global, 0),
                (5, Method::Global, 2),
                (5, Method::Brute, 0),
                (5, Method::Brute, 2),
                (4, Method::Global, 1000),
                (4, Method::Global, 1002),
                (4, Method::Brute, 1000),
                (4, Method::Brute, 1002),
            ]
        );

        // Same seeds, so the certified value must match the enumeration.
        for k in 0..2 {
            let global = &report.rows[k];
            let brute = &report.rows[k + 2];
            let (g, b) = (global.value.unwrap(), brute.value.unwrap());
            assert!((g - b).abs() <= 1e-8 * (1.0 + b.abs()));
            assert_eq!(global.status, "converged");
            assert_eq!(brute.status, "exact");
        }

        // Aggregates: one per (cell, method), covering every repeat.
        assert_eq!(report.aggregates.len(), 4);
        for agg in &report.aggregates {
            assert_eq!(agg.runs, 2);
            assert_eq!(agg.failures, 0);
            assert_eq!(agg.values.len(), 2);
            assert!(agg.time_ms_min <= agg.time_ms_mean);
            assert!(agg.time_ms_mean <= agg.time_ms_max);
            assert!(!agg.headline().is_empty());
        }

        // Every persisted record re-verifies.
        for record in out.runs.iter().flatten() {
            record.reverify().unwrap();
        }
    }

    #[test]
    fn empty_method_list_yields_empty_table() {
        let mut cfg = tiny_config();
        cfg.methods = Vec::new();
        let out = run_suite(&cfg).unwrap();
        assert!(out.report.rows.is_empty());
        assert_eq!(out.report.failures, 0);
        assert_eq!(out.report.to_csv_string(), format!("{RESULT_COLUMNS}\n"));
    }

    #[test]
    fn per_run_failures_are_recorded_and_suite_continues() {
        let mut cfg = tiny_config();
        cfg.methods = vec![Method::Brute, Method::Global];
        // Brute force rejects n = 12, the global solver does not.
        cfg.cells[0].n = 12;
        cfg.cells[0].epsilon = 1e-2;
        let out = run_suite(&cfg).unwrap();
        let report = &out.report;
        assert_eq!(report.rows.len(), 8);
        assert_eq!(report.failures, 2);

        let failed: Vec<&ResultRow> =
            report.rows.iter().filter(|r| r.status == "error").collect();
        assert_eq!(failed.len(), 2);
        for row in failed {
            assert_eq!(row.method, Method::Brute);
            assert_eq!(row.value, None);
            assert!(row.error.as_deref().unwrap().contains("n <= 10"));
        }
        // The same cell still succeeded under the other method.
        assert!(report
            .rows
            .iter()
            .any(|r| r.n == 12 && r.method == Method::Global && r.status == "converged"));
    }

    #[test]
    fn csv_has_fixed_columns_and_full_precision() {
        let mut cfg = tiny_config();
        cfg.repeats = 1;
        cfg.methods = vec![Method::Global];
        let out = run_suite(&cfg).unwrap();
        let csv = out.report.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(RESULT_COLUMNS));
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 12);
            // value parses back to the exact stored bits
            let row = out
                .report
                .rows
                .iter()
                .find(|r| r.seed.to_string() == cells[6])
                .unwrap();
            let parsed: f64 = cells[7].parse().unwrap();
            assert_eq!(parsed.to_bits(), row.value.unwrap().to_bits());
        }
    }

    #[test]
    fn identical_seeds_reproduce_identical_tables() {
        let cfg = tiny_config();
        let a = run_suite(&cfg).unwrap();
        let b = run_suite(&cfg).unwrap();
        assert_eq!(stable_csv(&a.report), stable_csv(&b.report));
        // Timing aside, the structured rows agree bit-for-bit too.
        for (ra, rb) in a.report.rows.iter().zip(&b.report.rows) {
            assert_eq!(
                ra.value.unwrap().to_bits(),
                rb.value.unwrap().to_bits()
            );
            assert_eq!(ra.iters, rb.iters);
        }
    }

    #[test]
    fn aggregate_csv_lists_every_cell() {
        let cfg = tiny_config();
        let out = run_suite(&cfg).unwrap();
        let csv = aggregates_to_csv(&out.report.aggregates);
        assert_eq!(csv.lines().count(), 1 + out.report.aggregates.len());
        assert!(csv.starts_with("type,n,lx,ly,eps,method,runs,failures,"));
    }
}
