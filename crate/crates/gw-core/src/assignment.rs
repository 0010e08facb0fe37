//! Exact linear assignment on dense f64 cost matrices via shortest
//! augmenting paths with dual potentials (the Jonker-Volgenant scheme).
//! Worst case O(n^3); in practice far cheaper because each augmentation
//! stops at the first free column.
//!
//! The implementation is fully deterministic: scanning is in ascending
//! index order and all comparisons are strict, so equal-cost alternatives
//! resolve toward the lowest row index, then the lowest column index (in
//! particular, a constant matrix yields the identity assignment).

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::coupling::Permutation;
use crate::error::{GwError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub struct AssignmentResult {
    /// Row `i` is assigned to column `perm[i]`.
    pub perm: Permutation,
    /// Total cost of the assignment under the original matrix.
    pub value: f64,
    pub direction: Direction,
}

/// Solves `opt_perm sum_i cost[i, perm(i)]` exactly.
pub fn lap_solve(cost: ArrayView2<'_, f64>, direction: Direction) -> Result<AssignmentResult> {
    let (rows, cols) = cost.dim();
    if rows != cols {
        return Err(GwError::InvalidArgument(format!(
            "assignment needs a square matrix, got {rows}x{cols}"
        )));
    }
    if rows == 0 {
        return Err(GwError::InvalidArgument("empty cost matrix".into()));
    }
    if cost.iter().any(|v| !v.is_finite()) {
        return Err(GwError::InvalidArgument(
            "cost matrix has non-finite entries".into(),
        ));
    }
    let n = rows;

    // Work on a contiguous row-major copy, negated for maximization.
    let sign = match direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    let mut c = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            c[i * n + j] = sign * cost[[i, j]];
        }
    }

    const FREE: usize = usize::MAX;
    let mut u = vec![0.0f64; n + 1]; // row potentials
    let mut v = vec![0.0f64; n + 1]; // column potentials (col n is virtual)
    let mut owner = vec![FREE; n + 1]; // owner[j] = row assigned to column j
    let mut way = vec![0usize; n + 1]; // predecessor column on the alternating path

    for i in 0..n {
        owner[n] = i;
        let mut j0 = n;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = FREE;
            let row = &c[i0 * n..(i0 + 1) * n];
            for j in 0..n {
                if !used[j] {
                    let cur = row[j] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            debug_assert!(j1 != FREE, "augmenting path ran out of columns");
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == FREE {
                break;
            }
        }
        // Augment along the alternating path back to the virtual column.
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == n {
                break;
            }
        }
    }

    let mut map = vec![0usize; n];
    for j in 0..n {
        map[owner[j]] = j;
    }
    let perm = Permutation::new(map)?;
    let value = assignment_value(cost, &perm);
    Ok(AssignmentResult {
        perm,
        value,
        direction,
    })
}

/// Total cost of a given assignment under `cost`.
#[must_use]
pub fn assignment_value(cost: ArrayView2<'_, f64>, perm: &Permutation) -> f64 {
    perm.as_slice()
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[[i, j]])
        .sum()
}

/// Extremal value of the linear functional `<coeff, G>` over the polytope of
/// doubly stochastic matrices. The extremum is attained at a permutation
/// matrix (the polytope's vertices), so this is a single assignment solve.
pub fn transport_bound(coeff: ArrayView2<'_, f64>, direction: Direction) -> Result<f64> {
    Ok(lap_solve(coeff, direction)?.value)
}
