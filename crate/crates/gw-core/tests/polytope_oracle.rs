//! Cross-validates the incremental vertex cover against an exhaustive
//! oracle that enumerates vertices by solving every r-subset of the
//! accumulated constraints. After every single cut the two vertex sets
//! must coincide, so any drift in the incremental bookkeeping is caught
//! at the step that introduced it.

use gw_core::oracle;
use gw_core::{GwError, PolytopeCover, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MATCH_TOL: f64 = 1e-7;

/// Cover plus the flat constraint list the oracle needs.
struct Tracked {
    cover: PolytopeCover,
    constraints: Vec<(Vec<f64>, f64)>,
}

impl Tracked {
    fn from_box(bounds: &[(f64, f64)]) -> Self {
        let cover = PolytopeCover::init_box(bounds, 1_000_000, Tolerances::default())
            .expect("box within cap");
        let r = bounds.len();
        let mut constraints = Vec::with_capacity(2 * r);
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            let mut up = vec![0.0; r];
            up[k] = 1.0;
            constraints.push((up, hi));
            let mut down = vec![0.0; r];
            down[k] = -1.0;
            constraints.push((down, -lo));
        }
        Tracked { cover, constraints }
    }

    fn cut(&mut self, normal: &[f64], beta: f64) {
        self.cover
            .add_cut_raw(normal, beta)
            .expect("cut keeps the region nonempty");
        self.constraints.push((normal.to_vec(), beta));
    }

    /// Every oracle vertex must match exactly one cover vertex and vice
    /// versa (greedy bipartite matching under a per-coordinate tolerance).
    /// Both sides are deduplicated with the oracle's rule first: adjacent
    /// cover vertices may legitimately sit closer than the comparison
    /// tolerance, and the oracle merges such pairs.
    fn assert_matches_oracle(&self, context: &str) {
        let r = self.cover.r();
        let expected = oracle::vertices_by_subset_enumeration(&self.constraints, r, MATCH_TOL);
        let cover_points = dedupe_points(
            (0..self.cover.n_vertices())
                .map(|i| self.cover.vertex(i).to_vec())
                .collect(),
        );
        assert_eq!(
            cover_points.len(),
            expected.len(),
            "{context}: cover has {} vertices after dedupe, oracle found {}",
            cover_points.len(),
            expected.len()
        );
        let mut used = vec![false; cover_points.len()];
        for want in &expected {
            let found = (0..cover_points.len()).find(|&i| {
                !used[i] && close(&cover_points[i], want)
            });
            match found {
                Some(i) => used[i] = true,
                None => panic!("{context}: oracle vertex {want:?} missing from cover"),
            }
        }
    }

    /// Largest per-coordinate extent of the current vertex set.
    fn extent(&self) -> f64 {
        let r = self.cover.r();
        let mut span = 0.0f64;
        for k in 0..r {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..self.cover.n_vertices() {
                let v = self.cover.vertex(i)[k];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            span = span.max(hi - lo);
        }
        span
    }

    /// Structural invariants that do not need the oracle: membership,
    /// symmetric adjacency, and enough shared tight constraints per edge.
    fn assert_structural_invariants(&self, context: &str) {
        let r = self.cover.r();
        for i in 0..self.cover.n_vertices() {
            let v = self.cover.vertex(i);
            assert!(
                self.cover.contains(v),
                "{context}: vertex {i} fails its own membership test"
            );
            let tight = self.cover.tight_constraints(i);
            assert!(
                tight.len() >= r,
                "{context}: vertex {i} tight on only {} constraints",
                tight.len()
            );
            for &j in self.cover.neighbors(i) {
                let j = j as usize;
                assert_ne!(i, j, "{context}: self-loop at vertex {i}");
                assert!(
                    self.cover.neighbors(j).contains(&(i as u32)),
                    "{context}: adjacency not symmetric for ({i},{j})"
                );
                let tight_j = self.cover.tight_constraints(j);
                let shared = tight.iter().filter(|c| tight_j.contains(c)).count();
                assert!(
                    shared >= r - 1,
                    "{context}: neighbors ({i},{j}) share only {shared} constraints"
                );
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(u, v)| (u - v).abs() <= MATCH_TOL * (1.0 + v.abs()))
}

/// Greedy merge of points closer than the comparison tolerance, mirroring
/// the oracle's own deduplication.
fn dedupe_points(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| close(q, &p)) {
            out.push(p);
        }
    }
    out
}

/// Runs one random cut sequence at the given dimension, checking the full
/// vertex set against the oracle after every applied cut.
fn run_sequence(r: usize, n_cuts: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds: Vec<(f64, f64)> = (0..r)
        .map(|_| {
            let lo = rng.random_range(-3.0..-0.5);
            let hi = rng.random_range(0.5..3.0);
            (lo, hi)
        })
        .collect();
    let mut tracked = Tracked::from_box(&bounds);
    tracked.assert_matches_oracle(&format!("r={r} seed={seed} init"));

    let mut applied = 0;
    let mut attempts = 0;
    let mut collapsed = false;
    while applied < n_cuts && attempts < 4 * n_cuts {
        // every cut strictly shrinks the region, so stop once it degenerates
        // to the scale where set comparison is dominated by tolerances
        if tracked.extent() < 1e-3 {
            collapsed = true;
            break;
        }
        attempts += 1;
        let normal: Vec<f64> = (0..r).map(|_| rng.random_range(-1.0..1.0)).collect();
        if dot(&normal, &normal).sqrt() < 0.3 {
            continue;
        }
        let scores: Vec<f64> = (0..tracked.cover.n_vertices())
            .map(|i| dot(&normal, tracked.cover.vertex(i)))
            .collect();
        let lo = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-6 {
            continue;
        }
        let beta = lo + rng.random_range(0.15..0.9) * (hi - lo);
        tracked.cut(&normal, beta);
        applied += 1;
        let context = format!("r={r} seed={seed} cut={applied}");
        tracked.assert_matches_oracle(&context);
        tracked.assert_structural_invariants(&context);
    }
    assert!(
        collapsed || applied >= n_cuts / 2,
        "r={r} seed={seed}: too many degenerate draws ({applied}/{n_cuts})"
    );
}

#[test]
fn random_cut_sequences_match_oracle_r2() {
    for seed in 0..20 {
        run_sequence(2, 40, 1000 + seed);
    }
}

#[test]
fn random_cut_sequences_match_oracle_r3() {
    for seed in 0..16 {
        run_sequence(3, 30, 2000 + seed);
    }
}

#[test]
fn random_cut_sequences_match_oracle_r4() {
    for seed in 0..12 {
        run_sequence(4, 25, 3000 + seed);
    }
}

#[test]
fn square_truncation_yields_pentagon() {
    let mut tracked = Tracked::from_box(&[(0.0, 1.0), (0.0, 1.0)]);
    tracked.cut(&[1.0, 1.0], 1.5);
    assert_eq!(tracked.cover.n_vertices(), 5);
    tracked.assert_matches_oracle("pentagon");
    tracked.assert_structural_invariants("pentagon");
}

#[test]
fn cube_cut_through_corner_neighbors_adds_nothing() {
    // x + y + z <= 2 passes exactly through the three vertices adjacent to
    // (1,1,1): the corner disappears and no new vertex is created.
    let mut tracked = Tracked::from_box(&[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]);
    tracked.cut(&[1.0, 1.0, 1.0], 2.0);
    assert_eq!(tracked.cover.n_vertices(), 7);
    tracked.assert_matches_oracle("cube tight corner");
    tracked.assert_structural_invariants("cube tight corner");
}

#[test]
fn cube_corner_truncation_adds_triangle() {
    let mut tracked = Tracked::from_box(&[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]);
    tracked.cut(&[1.0, 1.0, 1.0], 2.5);
    assert_eq!(tracked.cover.n_vertices(), 10);
    tracked.assert_matches_oracle("cube truncated corner");
    tracked.assert_structural_invariants("cube truncated corner");
}

#[test]
fn redundant_cut_changes_nothing() {
    let mut tracked = Tracked::from_box(&[(0.0, 1.0), (0.0, 1.0)]);
    let before: Vec<Vec<f64>> = (0..tracked.cover.n_vertices())
        .map(|i| tracked.cover.vertex(i).to_vec())
        .collect();
    let report = tracked.cover.add_cut_raw(&[1.0, 1.0], 10.0).unwrap();
    assert_eq!((report.n_removed, report.n_added), (0, 0));
    assert_eq!(tracked.cover.n_vertices(), before.len());
    for (i, v) in before.iter().enumerate() {
        assert_eq!(tracked.cover.vertex(i), v.as_slice());
    }
}

#[test]
fn infeasible_cut_is_rejected() {
    let mut cover =
        PolytopeCover::init_box(&[(0.0, 1.0), (0.0, 1.0)], 1_000_000, Tolerances::default())
            .expect("box within cap");
    let err = cover.add_cut_raw(&[1.0, 0.0], -5.0).unwrap_err();
    assert!(
        matches!(err, GwError::InfeasibleCut),
        "expected InfeasibleCut, got {err:?}"
    );
    // the failed cut must not have been recorded
    assert_eq!(cover.n_constraints(), 4);
    assert_eq!(cover.n_vertices(), 4);
}

#[test]
fn cached_minimization_agrees_with_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut tracked = Tracked::from_box(&[(-2.0, 1.5), (-1.0, 2.0), (-1.5, 1.0)]);
    for _ in 0..12 {
        let normal: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        if dot(&normal, &normal).sqrt() < 0.3 {
            continue;
        }
        let scores: Vec<f64> = (0..tracked.cover.n_vertices())
            .map(|i| dot(&normal, tracked.cover.vertex(i)))
            .collect();
        let lo = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-6 {
            continue;
        }
        tracked.cut(&normal, lo + 0.6 * (hi - lo));
    }

    let f = |v: &[f64]| -> f64 { -v.iter().map(|u| u * u).sum::<f64>() - v[0] };
    let (idx, val) = tracked.cover.min_vertex_cached(f).unwrap();
    let brute = (0..tracked.cover.n_vertices())
        .map(|i| f(tracked.cover.vertex(i)))
        .fold(f64::INFINITY, f64::min);
    assert!((val - brute).abs() <= 1e-12 * (1.0 + brute.abs()));
    assert!((f(tracked.cover.vertex(idx)) - val).abs() <= 1e-12 * (1.0 + val.abs()));

    // switching objectives requires an explicit cache reset
    tracked.cover.invalidate_values();
    let g = |v: &[f64]| -> f64 { v[1] - v[2] };
    let (_, gval) = tracked.cover.min_vertex_cached(g).unwrap();
    let gbrute = (0..tracked.cover.n_vertices())
        .map(|i| g(tracked.cover.vertex(i)))
        .fold(f64::INFINITY, f64::min);
    assert!((gval - gbrute).abs() <= 1e-12 * (1.0 + gbrute.abs()));
}

#[test]
fn cover_dump_is_valid_json() {
    let tracked = Tracked::from_box(&[(0.0, 1.0), (0.0, 1.0)]);
    let parsed: serde_json::Value = serde_json::from_str(&tracked.cover.dump_json()).unwrap();
    assert_eq!(parsed["r"], 2);
    assert_eq!(parsed["n_vertices"], 4);
    assert_eq!(parsed["n_constraints"], 4);
    assert!(parsed["vertices"].is_array());
}
