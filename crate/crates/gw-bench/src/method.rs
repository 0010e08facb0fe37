//! Uniform dispatch over the three solve methods, so the suite, pairwise,
//! and landmark drivers share one code path and one outcome shape.

use gw_core::baselines::{brute_force, multi_start};
use gw_core::solver::solve;
use gw_core::timing::Stopwatch;
use gw_core::{GwError, GwInstance, Result, SolveTrace, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Certified cutting-plane solver: value plus lower bound.
    Global,
    /// Multi-start conditional-gradient local search; no certificate.
    Local,
    /// Exhaustive enumeration; exact but limited to small `n`.
    Brute,
}

impl Method {
    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Global => "global",
            Method::Local => "local",
            Method::Brute => "brute",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = GwError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Method::Global),
            "local" => Ok(Method::Local),
            "brute" => Ok(Method::Brute),
            other => Err(GwError::InvalidArgument(format!(
                "unknown method {other:?} (expected global | local | brute)"
            ))),
        }
    }
}

/// Knobs for one run, covering all methods. `solver.seed` doubles as the
/// seed for the local-search starts, so a single value pins the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub solver: SolverConfig,
    /// Restarts used by [`Method::Local`].
    pub local_starts: usize,
    /// Iteration cap per local-search run.
    pub local_iters: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            solver: SolverConfig::default(),
            local_starts: 10,
            local_iters: 1000,
        }
    }
}

/// What one run produced, uniform across methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    /// Discrepancy at `assignment`.
    pub value: f64,
    /// Certified lower bound; `None` for local search, which proves nothing.
    pub lower: Option<f64>,
    /// The best permutation found, as the image list of `0..n`.
    pub assignment: Vec<usize>,
    /// Cutting-plane iterations, local restarts, or enumerated permutations.
    pub iters: usize,
    /// Solver status string for `global`; `local_opt` / `exact` otherwise.
    pub status: String,
    pub time_ms: f64,
    /// Full bound history; present for `global` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<SolveTrace>,
}

impl MethodOutcome {
    /// Whether this run's value is trustworthy on its own: a certified
    /// convergence or an exhaustive search. Local results always need a
    /// reference to compare against.
    #[must_use]
    pub fn is_certified(&self) -> bool {
        self.status == "converged" || self.status == "exact"
    }
}

/// Runs `method` on the instance and normalizes the outcome.
pub fn run_method(inst: &GwInstance, method: Method, cfg: &RunConfig) -> Result<MethodOutcome> {
    let watch = Stopwatch::start();
    let mut out = match method {
        Method::Global => {
            let res = solve(inst, &cfg.solver)?;
            MethodOutcome {
                value: res.value,
                lower: Some(res.lower),
                assignment: res.best_perm.as_slice().to_vec(),
                iters: res.trace.iterations(),
                status: res.status().as_str().to_string(),
                time_ms: 0.0,
                trace: Some(res.trace),
            }
        }
        Method::Local => {
            let rep = multi_start(inst, cfg.local_starts, cfg.solver.seed, None, cfg.local_iters)?;
            MethodOutcome {
                value: rep.best_value,
                lower: None,
                assignment: rep.best_perm.as_slice().to_vec(),
                iters: rep.n_starts,
                status: "local_opt".into(),
                time_ms: 0.0,
                trace: None,
            }
        }
        Method::Brute => {
            let (perm, value) = brute_force(inst)?;
            MethodOutcome {
                value,
                lower: Some(value),
                assignment: perm.as_slice().to_vec(),
                iters: (1..=inst.n()).product(),
                status: "exact".into(),
                time_ms: 0.0,
                trace: None,
            }
        }
    };
    out.time_ms = watch.elapsed_ms();
    Ok(out)
}
