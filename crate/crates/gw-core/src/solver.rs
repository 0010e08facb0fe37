//! Cutting-plane solver with certified bounds.
//!
//! The relaxed problem minimizes the concave objective `-|W|^2 - w + c0` over
//! an outer polytope of the feasible image set in `(w, W)` space. Each
//! iteration takes the minimizing vertex, prices a supporting halfspace for
//! the feasible set at that point via one assignment solve, and tightens the
//! polytope with it. The vertex minimum is a lower bound for the discrepancy;
//! the permutation that prices the cut gives an upper bound. The gap between
//! the two shrinks to zero, so the best permutation seen is globally optimal
//! within the requested tolerance when the loop stops on the gap test.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assignment::{lap_solve, Direction};
use crate::baselines::local_search;
use crate::coupling::Permutation;
use crate::error::{GwError, Result};
use crate::instance::GwInstance;
use crate::io::float17;
use crate::polytope::{HalfspaceCut, PolytopeCover, ProjPoint};
use crate::timing::Stopwatch;
use crate::{tol, Tolerances, PROJ_DIM_CAP};

/// Consecutive duplicate cuts tolerated before the solve aborts as stalled.
const STALL_LIMIT: usize = 50;
/// Iteration cap for the optional warm-start local search.
const WARM_START_ITERS: usize = 1000;

/// How the termination test interprets `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// Stop when `upper - lower <= epsilon`.
    Absolute,
    /// Stop when `(upper - lower) / |upper| <= epsilon`; falls back to the
    /// absolute test when `|upper|` is below the relative-gap floor (the
    /// optimum-zero case).
    Relative,
}

impl GapMode {
    /// Whether the bound pair passes the termination test at `epsilon`.
    #[must_use]
    pub fn closed(self, lower: f64, upper: f64, epsilon: f64) -> bool {
        if !lower.is_finite() || !upper.is_finite() {
            return false;
        }
        let gap = upper - lower;
        match self {
            GapMode::Absolute => gap <= epsilon,
            GapMode::Relative => {
                if upper.abs() <= tol::REL_FLOOR {
                    gap <= epsilon
                } else {
                    gap <= epsilon * upper.abs()
                }
            }
        }
    }
}

impl Default for GapMode {
    fn default() -> Self {
        GapMode::Relative
    }
}

impl std::str::FromStr for GapMode {
    type Err = GwError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" | "abs" => Ok(GapMode::Absolute),
            "relative" | "rel" => Ok(GapMode::Relative),
            other => Err(GwError::InvalidArgument(format!(
                "unknown gap mode {other:?} (expected \"absolute\" or \"relative\")"
            ))),
        }
    }
}

/// Relative optimality gap `(upper - lower) / max(|upper|, floor)`.
#[must_use]
pub fn relative_gap(lower: f64, upper: f64) -> f64 {
    (upper - lower) / upper.abs().max(tol::REL_FLOOR)
}

/// Tuning knobs for [`solve`]. All fields have serde defaults, so partial
/// JSON/TOML config files work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Gap tolerance; interpreted per [`GapMode`].
    pub epsilon: f64,
    pub gap_mode: GapMode,
    pub max_iters: usize,
    /// Hard cap on cover vertices; exceeding it stops with `VertexCap`.
    pub vertex_cap: usize,
    pub tolerances: Tolerances,
    /// Seeds the warm-start search; the cutting-plane loop itself is
    /// deterministic and ignores it.
    pub seed: u64,
    /// Wall-clock budget; checked at the top of every iteration.
    pub time_limit_ms: Option<f64>,
    /// Seed the upper bound with one local-search run before cutting. Only
    /// ever changes upper bounds, so certificates stay valid.
    pub warm_start: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-8,
            gap_mode: GapMode::Relative,
            max_iters: 10_000,
            vertex_cap: 5_000_000,
            tolerances: Tolerances::default(),
            seed: 0,
            time_limit_ms: None,
            warm_start: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(GwError::InvalidArgument(format!(
                "epsilon must be finite and nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.max_iters == 0 {
            return Err(GwError::InvalidArgument(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.vertex_cap == 0 {
            return Err(GwError::InvalidArgument(
                "vertex_cap must be at least 1".into(),
            ));
        }
        for (name, v) in [
            ("tau_eq", self.tolerances.eq),
            ("tau_feas", self.tolerances.feas),
            ("tau_dedupe", self.tolerances.dedupe),
            ("tau_marginal", self.tolerances.marginal),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(GwError::InvalidArgument(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: SolverConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SolverConfig =
            toml::from_str(s).map_err(|e| GwError::Parse(format!("config TOML: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file, dispatching on the `.json` / `.toml` extension.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }
}

/// Why the solve loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Gap test passed; the result is certified optimal within `epsilon`.
    Converged,
    IterCap,
    VertexCap,
    /// Pricing kept reproducing existing constraints without closing the gap.
    Stalled,
    TimeLimit,
}

impl SolveStatus {
    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::IterCap => "iter_cap",
            SolveStatus::VertexCap => "vertex_cap",
            SolveStatus::Stalled => "stalled",
            SolveStatus::TimeLimit => "time_limit",
        }
    }

    #[must_use]
    pub fn is_converged(self) -> bool {
        self == SolveStatus::Converged
    }
}

/// One iteration of the bound history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub lower: f64,
    pub upper: f64,
    /// Absolute gap `upper - lower` at this iteration.
    pub gap: f64,
    /// Offset of the cut priced this iteration (applied or skipped).
    pub cut_beta: f64,
    /// Cover vertex count after applying the cut.
    pub vertices: usize,
    /// Cumulative wall-clock time.
    pub millis: f64,
}

/// Full bound history plus the stop reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
    pub status: SolveStatus,
}

impl SolveTrace {
    #[must_use]
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    #[must_use]
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// CSV export (`iter,lower,upper,gap,vertices,millis`), one row per
    /// iteration, floats at full precision.
    #[must_use]
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("iter,lower,upper,gap,vertices,millis\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{:.3}\n",
                r.iter,
                float17(r.lower),
                float17(r.upper),
                float17(r.gap),
                r.vertices,
                r.millis
            ));
        }
        out
    }

    #[must_use]
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialization cannot fail")
    }
}

/// Output of [`solve`]: the best permutation found, its value, and the
/// certified lower bound with the full trace behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_perm: Permutation,
    /// Discrepancy at `best_perm`, recomputed from the instance.
    pub value: f64,
    /// Certified lower bound for the optimal value.
    pub lower: f64,
    pub trace: SolveTrace,
}

impl SolveResult {
    #[must_use]
    pub fn status(&self) -> SolveStatus {
        self.trace.status
    }

    /// Absolute certificate gap `value - lower`.
    #[must_use]
    pub fn gap(&self) -> f64 {
        self.value - self.lower
    }
}

/// Per-coordinate range of the feasible image set: for each packed coordinate
/// (first `w = <L, P>`, then each `W_ab = 2 (X P Y^T)_ab`), the min and max
/// over all permutations via one assignment solve each.
pub fn bounding_box(inst: &GwInstance) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = inst.proj_dim();
    let solve_one = |k: usize| -> Result<(f64, f64)> {
        let cost = inst.coordinate_cost(k);
        let lo = lap_solve(cost.view(), Direction::Min)?.value;
        let hi = lap_solve(cost.view(), Direction::Max)?.value;
        Ok((lo, hi))
    };
    #[cfg(feature = "parallel")]
    let per_coord = {
        use rayon::prelude::*;
        (0..r)
            .into_par_iter()
            .map(solve_one)
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_coord = (0..r).map(solve_one).collect::<Result<Vec<_>>>()?;
    let lo = per_coord.iter().map(|p| p.0).collect();
    let hi = per_coord.iter().map(|p| p.1).collect();
    Ok((lo, hi))
}

/// Prices the supporting halfspace at a relaxed minimizer `(w_N, W_N)`: the
/// cut `<2 W_N, W> + w <= beta` with `beta` the assignment maximum of the
/// linearized cost, together with the maximizing permutation. Every
/// permutation image satisfies the cut; the returned one is tight on it.
pub fn make_cut(inst: &GwInstance, vtx: &ProjPoint) -> Result<(HalfspaceCut, Permutation)> {
    let cost = inst.linearized_cost(vtx.wmat.view());
    let best = lap_solve(cost.view(), Direction::Max)?;
    let cut = HalfspaceCut {
        alpha: 1.0,
        z: vtx.wmat.mapv(|v| 2.0 * v),
        beta: best.value,
    };
    Ok((cut, best.perm))
}

/// One pricing step of the cutting-plane loop, as seen by an observer: the
/// halfspace produced at this iteration's relaxed minimizer together with the
/// permutation attaining its offset (the cut is tight on that permutation's
/// image).
#[derive(Debug, Clone)]
pub struct CutEvent {
    pub iter: usize,
    pub cut: HalfspaceCut,
    pub gamma: Permutation,
    /// False when the cut duplicated an existing constraint (or hit the
    /// vertex cap) and was not added to the cover.
    pub applied: bool,
}

/// Runs the cutting-plane loop to the configured tolerance. Cap and stall
/// conditions come back as trace statuses, not errors; errors indicate
/// invalid input or an internal invariant failure.
pub fn solve(inst: &GwInstance, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_observed(inst, cfg, |_| {})
}

/// [`solve`] with a callback invoked once per iteration after pricing.
/// Validation harnesses use it to audit every cut the loop emits; the
/// observer cannot influence the run.
pub fn solve_observed(
    inst: &GwInstance,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&CutEvent),
) -> Result<SolveResult> {
    cfg.validate()?;
    let r = inst.proj_dim();
    if r > PROJ_DIM_CAP {
        return Err(GwError::ProjDimTooLarge {
            r,
            cap: PROJ_DIM_CAP,
        });
    }
    let watch = Stopwatch::start();

    let mut upper = f64::INFINITY;
    let mut best_perm: Option<Permutation> = None;
    if cfg.warm_start {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
        let start = Permutation::random(inst.n(), &mut rng).to_coupling();
        let (perm, value, _) = local_search(inst, &start, WARM_START_ITERS)?;
        upper = value;
        best_perm = Some(perm);
    }

    let (lo, hi) = bounding_box(inst)?;
    let bounds: Vec<(f64, f64)> = lo.into_iter().zip(hi).collect();
    let mut cover = match PolytopeCover::init_box(&bounds, cfg.vertex_cap, cfg.tolerances) {
        Ok(c) => c,
        Err(GwError::VertexCapExceeded { .. }) => {
            return finish(
                inst,
                best_perm,
                f64::NEG_INFINITY,
                Vec::new(),
                SolveStatus::VertexCap,
            );
        }
        Err(e) => return Err(e),
    };

    let mut lower = f64::NEG_INFINITY;
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut status = SolveStatus::IterCap;
    let mut stalls = 0usize;

    for iter in 1..=cfg.max_iters {
        if let Some(limit) = cfg.time_limit_ms {
            if watch.elapsed_ms() > limit {
                status = SolveStatus::TimeLimit;
                break;
            }
        }

        let (vidx, vval) = cover.min_vertex_cached(|p| inst.projected_objective_packed(p))?;
        lower = lower.max(vval);

        let point = ProjPoint::unpack(inst.dim_x(), inst.dim_y(), cover.vertex(vidx));
        let (cut, gamma) = make_cut(inst, &point)?;
        let candidate = inst.gw_value_lowrank_perm(&gamma)?;
        if candidate < upper {
            upper = candidate;
            best_perm = Some(gamma.clone());
        }

        let mut cap_hit = false;
        let mut applied = false;
        if cover.is_duplicate(&cut) {
            stalls += 1;
        } else {
            stalls = 0;
            match cover.add_cut(&cut) {
                Ok(_) => applied = true,
                Err(GwError::VertexCapExceeded { .. }) => cap_hit = true,
                Err(e) => return Err(e),
            }
        }
        observer(&CutEvent {
            iter,
            cut: cut.clone(),
            gamma: gamma.clone(),
            applied,
        });

        records.push(TraceRecord {
            iter,
            lower,
            upper,
            gap: upper - lower,
            cut_beta: cut.beta,
            vertices: cover.n_vertices(),
            millis: watch.elapsed_ms(),
        });

        if cfg.gap_mode.closed(lower, upper, cfg.epsilon) {
            status = SolveStatus::Converged;
            break;
        }
        if cap_hit {
            status = SolveStatus::VertexCap;
            break;
        }
        if stalls >= STALL_LIMIT {
            status = SolveStatus::Stalled;
            break;
        }
    }

    finish(inst, best_perm, lower, records, status)
}

fn finish(
    inst: &GwInstance,
    best: Option<Permutation>,
    lower: f64,
    records: Vec<TraceRecord>,
    status: SolveStatus,
) -> Result<SolveResult> {
    let best_perm = best.unwrap_or_else(|| Permutation::identity(inst.n()));
    let value = inst.gw_value_lowrank_perm(&best_perm)?;
    Ok(SolveResult {
        best_perm,
        value,
        lower,
        trace: SolveTrace { records, status },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::PointCloud;
    use crate::synth::{gaussian_cloud, uniform_ball_cloud};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn interval_pair() -> GwInstance {
        let x = PointCloud::from_points(&[vec![0.0], vec![1.0]]).unwrap();
        let y = PointCloud::from_points(&[vec![0.0], vec![2.0]]).unwrap();
        GwInstance::new(x, y).unwrap()
    }

    fn uball(n: usize, dim: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        uniform_ball_cloud(n, dim, &mut rng).unwrap()
    }

    fn gauss(n: usize, cov: &[f64], seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        gaussian_cloud(n, cov, &mut rng).unwrap()
    }

    #[test]
    fn bounding_box_interval_pair() {
        let inst = interval_pair();
        let (lo, hi) = bounding_box(&inst).unwrap();
        assert_eq!(lo, vec![-16.0, 0.0]);
        assert_eq!(hi, vec![0.0, 4.0]);
    }

    #[test]
    fn bounding_box_contains_every_permutation_image() {
        let x = gauss(5, &[1.0, 1.0], 11);
        let y = gauss(5, &[1.0, 0.5], 12);
        let inst = GwInstance::new(x, y).unwrap();
        let (lo, hi) = bounding_box(&inst).unwrap();
        for map in crate::oracle::all_permutations(5) {
            let perm = Permutation::new(map).unwrap();
            let packed = inst.image_point_perm(&perm).unwrap().pack();
            for (k, &v) in packed.iter().enumerate() {
                assert!(
                    v >= lo[k] - 1e-9 && v <= hi[k] + 1e-9,
                    "coordinate {k} = {v} outside [{}, {}]",
                    lo[k],
                    hi[k]
                );
            }
        }
    }

    #[test]
    fn make_cut_at_box_corner() {
        let inst = interval_pair();
        let vtx = ProjPoint {
            w: 0.0,
            wmat: ndarray::arr2(&[[4.0]]),
        };
        let (cut, gamma) = make_cut(&inst, &vtx).unwrap();
        assert_eq!(cut.alpha, 1.0);
        assert_eq!(cut.z, ndarray::arr2(&[[8.0]]));
        assert_eq!(cut.beta, 16.0);
        assert_eq!(gamma.as_slice(), &[0, 1]);
        // Both permutation images satisfy the cut; the identity is tight.
        let id = inst
            .image_point_perm(&Permutation::identity(2))
            .unwrap()
            .pack();
        let swap = inst
            .image_point_perm(&Permutation::new(vec![1, 0]).unwrap())
            .unwrap()
            .pack();
        assert_eq!(cut.slack(&id), 0.0);
        assert!(cut.slack(&swap) > 0.0);
    }

    #[test]
    fn make_cut_zero_gradient_uses_linear_term_alone() {
        let inst = interval_pair();
        let vtx = ProjPoint {
            w: 0.0,
            wmat: ndarray::arr2(&[[0.0]]),
        };
        let (cut, gamma) = make_cut(&inst, &vtx).unwrap();
        assert_eq!(cut.z, ndarray::arr2(&[[0.0]]));
        assert_eq!(cut.beta, 0.0);
        assert_eq!(gamma.as_slice(), &[1, 0]);
    }

    #[test]
    fn solve_interval_pair_traces_exactly() {
        let inst = interval_pair();
        let cfg = SolverConfig::default();
        let res = solve(&inst, &cfg).unwrap();

        assert_eq!(res.status(), SolveStatus::Converged);
        assert_eq!(res.value, 9.0);
        assert_eq!(res.lower, 9.0);
        assert_eq!(res.best_perm.as_slice(), &[0, 1]);

        let recs = &res.trace.records;
        assert_eq!(recs.len(), 3);
        let flat: Vec<(f64, f64, f64, usize)> = recs
            .iter()
            .map(|r| (r.lower, r.upper, r.cut_beta, r.vertices))
            .collect();
        assert_eq!(
            flat,
            vec![
                (-7.0, 9.0, 16.0, 4),
                (5.0, 9.0, 0.0, 3),
                (9.0, 9.0, 0.0, 3),
            ]
        );
    }

    #[test]
    fn solve_identical_clouds_certifies_zero() {
        let x = uball(6, 2, 21);
        let inst = GwInstance::new(x.clone(), x).unwrap();
        let scale = inst.cx_dot();
        let cfg = SolverConfig {
            epsilon: 1e-6 * scale.max(1.0),
            gap_mode: GapMode::Absolute,
            ..SolverConfig::default()
        };
        let res = solve(&inst, &cfg).unwrap();
        assert_eq!(res.status(), SolveStatus::Converged);
        assert!(res.value.abs() <= 1e-6 * scale.max(1.0));
        assert!(res.lower <= res.value + 1e-9);
    }

    #[test]
    fn solve_bounds_are_monotone_and_ordered() {
        let x = gauss(7, &[1.0, 1.0], 31);
        let y = gauss(7, &[1.0, 0.5], 32);
        let inst = GwInstance::new(x, y).unwrap();
        let res = solve(&inst, &SolverConfig::default()).unwrap();
        let recs = &res.trace.records;
        assert!(!recs.is_empty());
        for pair in recs.windows(2) {
            assert!(pair[1].lower >= pair[0].lower);
            assert!(pair[1].upper <= pair[0].upper);
        }
        for r in recs {
            assert!(r.gap >= -1e-9 * (1.0 + r.upper.abs()));
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let x = gauss(6, &[1.0, 1.0], 41);
        let y = uball(6, 2, 42);
        let inst = GwInstance::new(x, y).unwrap();
        let cfg = SolverConfig::default();
        let a = solve(&inst, &cfg).unwrap();
        let b = solve(&inst, &cfg).unwrap();
        assert_eq!(a.best_perm.as_slice(), b.best_perm.as_slice());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.lower.to_bits(), b.lower.to_bits());
        assert_eq!(a.trace.records.len(), b.trace.records.len());
        for (ra, rb) in a.trace.records.iter().zip(&b.trace.records) {
            assert_eq!(ra.lower.to_bits(), rb.lower.to_bits());
            assert_eq!(ra.upper.to_bits(), rb.upper.to_bits());
            assert_eq!(ra.cut_beta.to_bits(), rb.cut_beta.to_bits());
            assert_eq!(ra.vertices, rb.vertices);
        }
    }

    #[test]
    fn observer_sees_every_priced_cut() {
        let x = gauss(6, &[1.0, 1.0], 43);
        let y = uball(6, 2, 44);
        let inst = GwInstance::new(x, y).unwrap();
        let cfg = SolverConfig::default();
        let mut events: Vec<CutEvent> = Vec::new();
        let res = solve_observed(&inst, &cfg, |e| events.push(e.clone())).unwrap();

        assert_eq!(events.len(), res.trace.records.len());
        assert!(events.iter().any(|e| e.applied));
        for (e, r) in events.iter().zip(&res.trace.records) {
            assert_eq!(e.iter, r.iter);
            assert_eq!(e.cut.beta.to_bits(), r.cut_beta.to_bits());
            // The generating permutation's image is tight on its cut.
            let img = inst.image_point_perm(&e.gamma).unwrap().pack();
            assert!(e.cut.slack(&img).abs() <= 1e-9 * (1.0 + e.cut.beta.abs()));
        }

        // The plain entry point is the same loop minus the callback.
        let plain = solve(&inst, &cfg).unwrap();
        assert_eq!(plain.value.to_bits(), res.value.to_bits());
        assert_eq!(plain.trace.records.len(), res.trace.records.len());
    }

    #[test]
    fn warm_start_only_tightens_upper_bound() {
        let inst = interval_pair();
        let cfg = SolverConfig {
            warm_start: true,
            seed: 7,
            ..SolverConfig::default()
        };
        let res = solve(&inst, &cfg).unwrap();
        assert_eq!(res.status(), SolveStatus::Converged);
        assert_eq!(res.value, 9.0);
        assert_eq!(res.lower, 9.0);
        // Upper bound is seeded before the first iteration.
        assert_eq!(res.trace.records[0].upper, 9.0);
    }

    #[test]
    fn time_limit_zero_stops_immediately() {
        let inst = interval_pair();
        let cfg = SolverConfig {
            time_limit_ms: Some(0.0),
            ..SolverConfig::default()
        };
        let res = solve(&inst, &cfg).unwrap();
        assert_eq!(res.status(), SolveStatus::TimeLimit);
        assert!(res.trace.records.is_empty());
        assert_eq!(res.best_perm.as_slice(), &[0, 1]);
        assert_eq!(res.value, 9.0);
        assert_eq!(res.lower, f64::NEG_INFINITY);
    }

    #[test]
    fn iter_cap_status_reported() {
        let x = gauss(8, &[1.0, 1.0], 51);
        let y = gauss(8, &[1.0, 0.5], 52);
        let inst = GwInstance::new(x, y).unwrap();
        let cfg = SolverConfig {
            max_iters: 2,
            epsilon: 0.0,
            gap_mode: GapMode::Absolute,
            ..SolverConfig::default()
        };
        let res = solve(&inst, &cfg).unwrap();
        assert_eq!(res.status(), SolveStatus::IterCap);
        assert_eq!(res.trace.records.len(), 2);
        assert!(res.lower <= res.value + 1e-9);
    }

    #[test]
    fn gap_mode_logic() {
        assert!(GapMode::Absolute.closed(1.0, 1.0 + 1e-9, 1e-8));
        assert!(!GapMode::Absolute.closed(1.0, 1.01, 1e-8));
        // Relative: gap 1e-6 on magnitude 100 is 1e-8 relative.
        assert!(GapMode::Relative.closed(100.0, 100.0 + 1e-6, 1e-8));
        assert!(!GapMode::Relative.closed(1.0, 1.0 + 1e-6, 1e-8));
        // Zero-optimum fallback: |upper| below the floor compares absolutely.
        assert!(GapMode::Relative.closed(-1e-7, 0.0, 1e-6));
        assert!(!GapMode::Relative.closed(f64::NEG_INFINITY, 1.0, 1e-8));
        assert_eq!(relative_gap(9.0, 10.0), 0.1);
    }

    #[test]
    fn config_serde_round_trip_and_partial() {
        let cfg = SolverConfig {
            epsilon: 1e-4,
            gap_mode: GapMode::Absolute,
            seed: 9,
            ..SolverConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back = SolverConfig::from_json_str(&json).unwrap();
        assert_eq!(back, cfg);

        let partial = SolverConfig::from_json_str(r#"{"epsilon": 0.5}"#).unwrap();
        assert_eq!(partial.epsilon, 0.5);
        assert_eq!(partial.max_iters, 10_000);
        assert_eq!(partial.gap_mode, GapMode::Relative);

        let toml_cfg =
            SolverConfig::from_toml_str("epsilon = 1e-3\ngap_mode = \"absolute\"\n").unwrap();
        assert_eq!(toml_cfg.epsilon, 1e-3);
        assert_eq!(toml_cfg.gap_mode, GapMode::Absolute);

        assert!(SolverConfig::from_json_str(r#"{"epsilon": -1.0}"#).is_err());
        assert!(SolverConfig::from_toml_str("max_iters = 0").is_err());
    }

    #[test]
    fn trace_exports() {
        let inst = interval_pair();
        let res = solve(&inst, &SolverConfig::default()).unwrap();
        let csv = res.trace.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iter,lower,upper,gap,vertices,millis"));
        assert_eq!(csv.lines().count(), 1 + res.trace.records.len());
        let first = lines.next().unwrap();
        assert!(first.starts_with("1,-7."));

        let json = res.trace.to_json_string();
        let back: SolveTrace = serde_json::from_str(&json).unwrap();
        assert_eq!(back.status, res.trace.status);
        assert_eq!(back.records.len(), res.trace.records.len());
        for (a, b) in back.records.iter().zip(&res.trace.records) {
            // millis is wall-clock noise; everything else must survive.
            assert_eq!(
                (a.iter, a.lower, a.upper, a.gap, a.cut_beta, a.vertices),
                (b.iter, b.lower, b.upper, b.gap, b.cut_beta, b.vertices)
            );
        }
    }

    #[test]
    fn rejects_oversized_projection() {
        let coords =
            ndarray::Array2::from_shape_fn((4, 4), |(d, i)| (d * 4 + i) as f64);
        let x = PointCloud::with_dim_limit(coords, 4).unwrap();
        let inst = GwInstance::new(x.clone(), x).unwrap();
        match solve(&inst, &SolverConfig::default()) {
            Err(GwError::ProjDimTooLarge { r, cap }) => {
                assert_eq!(r, 17);
                assert_eq!(cap, PROJ_DIM_CAP);
            }
            other => panic!("expected ProjDimTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn random_instances_converge_with_tight_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for case in 0..5 {
            let n = 4 + (case % 3);
            let x = uball(n, 2, 100 + case as u64);
            let y = uball(n, 2, 200 + case as u64);
            let inst = GwInstance::new(x, y).unwrap();
            let res = solve(&inst, &SolverConfig::default()).unwrap();
            assert_eq!(res.status(), SolveStatus::Converged, "case {case}");
            assert!(res.gap() <= 1e-8 * res.value.abs().max(1e-12) + 1e-12);
            // The certificate must hold for random feasible couplings too.
            let plan = crate::coupling::Coupling::random_mixture(n, 3, &mut rng);
            assert!(inst.gw_value_lowrank(&plan).unwrap() >= res.lower - 1e-9);
        }
    }
}
