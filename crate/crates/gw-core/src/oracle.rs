//! Slow, independent reference implementations used to validate the fast
//! paths in the test suites. Everything here favors obviousness over speed:
//! quadruple-sum objectives, exhaustive permutation enumeration, and
//! vertex enumeration by solving every r-subset of constraints.
//!
//! Compiled only with the `oracle` feature, which the test targets enable
//! through their dev-dependencies.

use ndarray::ArrayView2;

use crate::cloud::PointCloud;

/// Exhaustive linear assignment: the extremal permutation and value of
/// `sum_i cost[i, perm(i)]`. Ties keep the lexicographically smallest
/// permutation because the search visits them in lexicographic order.
#[must_use]
pub fn assignment_by_enumeration(cost: ArrayView2<'_, f64>, maximize: bool) -> (Vec<usize>, f64) {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "square matrix required");
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut picked = vec![false; n];
    let mut current = Vec::with_capacity(n);
    fn rec(
        cost: &ArrayView2<'_, f64>,
        n: usize,
        maximize: bool,
        picked: &mut Vec<bool>,
        current: &mut Vec<usize>,
        acc: f64,
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        let i = current.len();
        if i == n {
            let better = match best {
                None => true,
                Some((_, v)) => {
                    if maximize {
                        acc > *v
                    } else {
                        acc < *v
                    }
                }
            };
            if better {
                *best = Some((current.clone(), acc));
            }
            return;
        }
        for j in 0..n {
            if !picked[j] {
                picked[j] = true;
                current.push(j);
                rec(cost, n, maximize, picked, current, acc + cost[[i, j]], best);
                current.pop();
                picked[j] = false;
            }
        }
    }
    rec(
        &cost,
        n,
        maximize,
        &mut picked,
        &mut current,
        0.0,
        &mut best,
    );
    best.expect("n >= 1")
}

/// All permutations of `0..n` in lexicographic order, for exhaustive checks.
/// Guarded to small `n` since the count is `n!`.
#[must_use]
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    assert!(n <= 8, "n! enumeration capped at n = 8");
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("larger element exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// The discrepancy objective evaluated as the literal quadruple sum
/// `(1/2) sum_{i,j,k,l} (|x_i-x_j|^2 - |y_k-y_l|^2)^2 G[i,k] G[j,l]`,
/// with all distances recomputed from coordinates on the spot.
#[must_use]
pub fn gw_value_by_quadruple_sum(
    x: &PointCloud,
    y: &PointCloud,
    plan: ArrayView2<'_, f64>,
) -> f64 {
    let n = x.len();
    assert_eq!(n, y.len());
    assert_eq!(plan.dim(), (n, n));
    let d2 = |c: &PointCloud, a: usize, b: usize| -> f64 {
        c.point(a)
            .iter()
            .zip(c.point(b).iter())
            .map(|(u, v)| (u - v) * (u - v))
            .sum()
    };
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dx = d2(x, i, j);
            for k in 0..n {
                let gik = plan[[i, k]];
                if gik == 0.0 {
                    continue;
                }
                for l in 0..n {
                    let diff = dx - d2(y, k, l);
                    acc += diff * diff * gik * plan[[j, l]];
                }
            }
        }
    }
    0.5 * acc
}

/// Globally optimal permutation by exhaustive search over all n!
/// permutations, scoring each with the pairwise sum
/// `(1/2) sum_{i,j} (|x_i-x_j|^2 - |y_(s i)-y_(s j)|^2)^2`.
/// Ties keep the lexicographically smallest permutation.
#[must_use]
pub fn gw_brute_force(x: &PointCloud, y: &PointCloud) -> (Vec<usize>, f64) {
    let n = x.len();
    assert_eq!(n, y.len());
    let d2 = |c: &PointCloud, a: usize, b: usize| -> f64 {
        c.point(a)
            .iter()
            .zip(c.point(b).iter())
            .map(|(u, v)| (u - v) * (u - v))
            .sum()
    };
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut picked = vec![false; n];
    let mut current: Vec<usize> = Vec::with_capacity(n);
    fn rec(
        n: usize,
        x: &PointCloud,
        y: &PointCloud,
        d2: &dyn Fn(&PointCloud, usize, usize) -> f64,
        picked: &mut Vec<bool>,
        current: &mut Vec<usize>,
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        if current.len() == n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let diff = d2(x, i, j) - d2(y, current[i], current[j]);
                    acc += diff * diff;
                }
            }
            let value = 0.5 * acc;
            if best.as_ref().is_none_or(|(_, v)| value < *v) {
                *best = Some((current.clone(), value));
            }
            return;
        }
        for j in 0..n {
            if !picked[j] {
                picked[j] = true;
                current.push(j);
                rec(n, x, y, d2, picked, current, best);
                current.pop();
                picked[j] = false;
            }
        }
    }
    rec(n, x, y, &d2, &mut picked, &mut current, &mut best);
    best.expect("n >= 1")
}

/// All vertices of `{ x : a_k . x <= b_k  for all k }` by brute force:
/// solve every r-subset of constraints as a linear system, keep solutions
/// that satisfy all constraints, deduplicate, and sort lexicographically.
#[must_use]
pub fn vertices_by_subset_enumeration(
    constraints: &[(Vec<f64>, f64)],
    r: usize,
    dedupe_tol: f64,
) -> Vec<Vec<f64>> {
    let m = constraints.len();
    if m < r {
        return Vec::new();
    }
    let scale: f64 = constraints
        .iter()
        .flat_map(|(a, _)| a.iter())
        .fold(1.0f64, |s, v| s.max(v.abs()));
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        // solve the r x r system for this subset
        let mut mat: Vec<Vec<f64>> = idx.iter().map(|&k| constraints[k].0.clone()).collect();
        let mut rhs: Vec<f64> = idx.iter().map(|&k| constraints[k].1).collect();
        if let Some(x) = solve_dense(&mut mat, &mut rhs, 1e-12 * scale) {
            let feasible = constraints.iter().all(|(a, b)| {
                let s: f64 = a.iter().zip(&x).map(|(u, v)| u * v).sum();
                s <= b + 1e-9 * (1.0 + b.abs() + s.abs())
            });
            if feasible
                && !out.iter().any(|v| {
                    v.iter()
                        .zip(&x)
                        .all(|(a, b)| (a - b).abs() <= dedupe_tol * (1.0 + a.abs()))
                })
            {
                out.push(x);
            }
        }
        // advance to the next r-combination of 0..m
        let mut i = r;
        while i > 0 && idx[i - 1] == m - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return sort_points(out);
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Lexicographic sort for canonical set comparison.
#[must_use]
pub fn sort_points(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| {
        for (u, v) in a.iter().zip(b.iter()) {
            match u.partial_cmp(v) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    pts
}

fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64], pivot_tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() <= pivot_tol {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}
