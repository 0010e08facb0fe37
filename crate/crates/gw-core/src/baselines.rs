//! Comparison methods: exhaustive search over all permutations for small
//! instances, and multi-start local search of the conditional-gradient kind.
//!
//! The local search maximizes the convex surrogate `g(G) = |2 X G Y^T|^2 +
//! <L, G>` (equivalent to minimizing the discrepancy) by repeatedly jumping
//! to the assignment maximizer of the current linearization. Each jump can
//! only increase `g`, so runs terminate at a fixed point, but that fixed
//! point need not be the global optimum — which is the whole reason the
//! certified solver exists.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::{lap_solve, Direction};
use crate::coupling::{Coupling, Permutation};
use crate::error::{GwError, Result};
use crate::instance::GwInstance;
use crate::tol;

/// Largest `n` accepted by [`brute_force`] (10! is ~3.6M evaluations).
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// Relative tolerance for the oracle-mode early stop in [`multi_start`].
pub const STOP_VALUE_REL_TOL: f64 = 1e-6;

/// Exact minimum of the discrepancy over all `n!` permutations. Ties keep
/// the lexicographically smallest permutation: the enumeration is
/// lexicographic and the comparison strict.
pub fn brute_force(inst: &GwInstance) -> Result<(Permutation, f64)> {
    let n = inst.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(GwError::BruteForceTooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let cx = inst.x().squared_distance_matrix();
    let cy = inst.y().squared_distance_matrix();
    let mut map: Vec<usize> = (0..n).collect();
    let mut best_map = map.clone();
    let mut best_value = f64::INFINITY;
    loop {
        // Partial sums only grow, so bailing at best_value is exact and
        // keeps the lexicographically first optimum.
        let mut acc = 0.0;
        'eval: for i in 0..n {
            for j in 0..n {
                let diff = cx[[i, j]] - cy[[map[i], map[j]]];
                acc += diff * diff;
            }
            if 0.5 * acc >= best_value {
                acc = f64::INFINITY;
                break 'eval;
            }
        }
        let value = 0.5 * acc;
        if value < best_value {
            best_value = value;
            best_map.copy_from_slice(&map);
        }
        if !next_permutation(&mut map) {
            break;
        }
    }
    Ok((Permutation::new(best_map)?, best_value))
}

/// One local-search run from `start`: repeat `G <- argmax <grad g(G), P>`
/// over permutations (one assignment solve per step) until a permutation
/// repeats or `max_iters` steps. Returns the final permutation, its
/// discrepancy, and the number of steps taken. `g` never decreases along the
/// way.
pub fn local_search(
    inst: &GwInstance,
    start: &Coupling,
    max_iters: usize,
) -> Result<(Permutation, f64, usize)> {
    if start.n() != inst.n() {
        return Err(GwError::SizeMismatch(inst.n(), start.n()));
    }
    if max_iters == 0 {
        return Err(GwError::InvalidArgument(
            "max_iters must be at least 1".into(),
        ));
    }
    let mut grad = inst.linearized_cost(inst.w_matrix(start).view());
    let mut visited: HashSet<Permutation> = HashSet::new();
    let mut current: Option<Permutation> = None;
    let mut iters = 0usize;
    while iters < max_iters {
        let step = lap_solve(grad.view(), Direction::Max)?;
        iters += 1;
        let fresh = visited.insert(step.perm.clone());
        current = Some(step.perm);
        if !fresh {
            break;
        }
        let perm = current.as_ref().expect("just set");
        grad = inst.linearized_cost(inst.w_matrix_perm(perm).view());
    }
    let perm = current.expect("at least one step runs");
    let value = inst.gw_value_lowrank_perm(&perm)?;
    Ok((perm, value, iters))
}

/// Aggregate outcome of [`multi_start`]. Start `k`'s result sits at index
/// `k` of the per-start vectors; in oracle mode those vectors only cover the
/// starts that actually ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchReport {
    pub best_perm: Permutation,
    pub best_value: f64,
    /// Requested number of starts (the per-start vectors may be shorter when
    /// an oracle stop triggers).
    pub n_starts: usize,
    pub per_start_values: Vec<f64>,
    pub converged_iterations: Vec<usize>,
    /// Whether some start came within [`STOP_VALUE_REL_TOL`] of the target;
    /// always false without a `stop_value`.
    pub target_reached: bool,
}

impl LocalSearchReport {
    #[must_use]
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Runs [`local_search`] from `n_starts` seeded random permutation starts.
/// With a `stop_value` (oracle mode) the starts run serially and stop at the
/// first one whose value is within [`STOP_VALUE_REL_TOL`] relative error of
/// the target; without one, all starts run (in parallel when enabled) and
/// the aggregation is by start index either way.
pub fn multi_start(
    inst: &GwInstance,
    n_starts: usize,
    seed: u64,
    stop_value: Option<f64>,
    max_iters: usize,
) -> Result<LocalSearchReport> {
    if n_starts == 0 {
        return Err(GwError::InvalidArgument(
            "n_starts must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Coupling> = (0..n_starts)
        .map(|_| Permutation::random(inst.n(), &mut rng).to_coupling())
        .collect();

    let mut target_reached = false;
    let outcomes: Vec<(Permutation, f64, usize)> = if let Some(target) = stop_value {
        let mut ran = Vec::with_capacity(n_starts);
        for start in &starts {
            let out = local_search(inst, start, max_iters)?;
            let hit = relative_error(out.1, target) <= STOP_VALUE_REL_TOL;
            ran.push(out);
            if hit {
                target_reached = true;
                break;
            }
        }
        ran
    } else {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            starts
                .par_iter()
                .map(|s| local_search(inst, s, max_iters))
                .collect::<Result<Vec<_>>>()?
        }
        #[cfg(not(feature = "parallel"))]
        {
            starts
                .iter()
                .map(|s| local_search(inst, s, max_iters))
                .collect::<Result<Vec<_>>>()?
        }
    };

    let mut best = 0usize;
    for i in 1..outcomes.len() {
        if outcomes[i].1 < outcomes[best].1 {
            best = i;
        }
    }
    Ok(LocalSearchReport {
        best_perm: outcomes[best].0.clone(),
        best_value: outcomes[best].1,
        n_starts,
        per_start_values: outcomes.iter().map(|o| o.1).collect(),
        converged_iterations: outcomes.iter().map(|o| o.2).collect(),
        target_reached,
    })
}

fn relative_error(value: f64, target: f64) -> f64 {
    (value - target).abs() / target.abs().max(tol::REL_FLOOR)
}

/// Advances `map` to its lexicographic successor in place; false once the
/// descending (last) arrangement is reached.
fn next_permutation(map: &mut [usize]) -> bool {
    let n = map.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| map[i] < map[i + 1]) else {
        return false;
    };
    let j = (i + 1..n)
        .rev()
        .find(|&j| map[j] > map[i])
        .expect("larger element exists");
    map.swap(i, j);
    map[i + 1..].reverse();
    true
}
