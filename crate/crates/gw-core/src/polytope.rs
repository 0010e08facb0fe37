//! Outer vertex cover of the feasible image in the projected space.
//!
//! The solver never represents the feasible region exactly; it maintains a
//! polytope `{ x in R^r : a_k . x <= b_k }` known to contain the image of
//! every coupling, represented by its full vertex set plus, per vertex, the
//! set of constraints it satisfies with equality (a bit row) and its
//! adjacency. Cutting a halfspace updates vertices, incidence and adjacency
//! incrementally:
//!
//! * vertices strictly beyond the cut are removed;
//! * every edge from a removed vertex to a surviving one is clipped at the
//!   cut hyperplane, creating a new vertex whose tight set is the edge's
//!   tight set (the bitwise AND of its endpoints) plus the cut itself;
//! * two vertices are adjacent exactly when they share at least `r - 1`
//!   tight constraints, so new adjacencies are found with `popcount(and)`
//!   over the affected vertices (everything on the cut hyperplane), and each
//!   new vertex additionally inherits an edge to its surviving parent.
//!
//! Degeneracies are absorbed by tolerance-classified tightness and by
//! merging new vertices that coincide within a quantized grid (their tight
//! sets are unioned). A cut that would empty the cover aborts with an error:
//! the cover provably contains at least one feasible image point, so an
//! emptied cover means the caller supplied an invalid cut.

use ndarray::Array2;
use serde::Serialize;
use std::collections::HashMap;

use crate::bitset::BitMatrix;
use crate::error::{GwError, Result};
use crate::Tolerances;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A point of the projected space: the scalar linear coordinate `w = <L, G>`
/// and the matrix coordinate `W = 2 X G Y^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    pub w: f64,
    pub wmat: Array2<f64>,
}

impl ProjPoint {
    /// Packs as `[w, vec(W)]` with `W` flattened row-major.
    #[must_use]
    pub fn pack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.wmat.len());
        v.push(self.w);
        v.extend(self.wmat.iter().copied());
        v
    }

    /// Inverse of [`ProjPoint::pack`] for a `lx x ly` matrix coordinate.
    #[must_use]
    pub fn unpack(lx: usize, ly: usize, packed: &[f64]) -> Self {
        assert_eq!(packed.len(), lx * ly + 1, "packed length mismatch");
        ProjPoint {
            w: packed[0],
            wmat: Array2::from_shape_vec((lx, ly), packed[1..].to_vec())
                .expect("shape checked above"),
        }
    }

    #[must_use]
    pub fn proj_dim(&self) -> usize {
        self.wmat.len() + 1
    }
}

/// The halfspace `alpha * w + <Z, W> <= beta` in the projected space.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceCut {
    pub alpha: f64,
    pub z: Array2<f64>,
    pub beta: f64,
}

impl HalfspaceCut {
    /// Normal vector in packed `(w, vec(W))` coordinates.
    #[must_use]
    pub fn packed_normal(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.z.len());
        v.push(self.alpha);
        v.extend(self.z.iter().copied());
        v
    }

    /// Left-hand side `alpha * w + <Z, W>` at a packed point.
    #[must_use]
    pub fn eval_packed(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.z.len() + 1);
        self.alpha * x[0]
            + self
                .z
                .iter()
                .zip(&x[1..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    /// Slack `beta - lhs(x)`; negative means `x` violates the cut.
    #[must_use]
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.beta - self.eval_packed(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CutReport {
    /// Vertices strictly beyond the cut, removed from the cover.
    pub n_removed: usize,
    /// Genuinely new vertices created on the cut hyperplane.
    pub n_added: usize,
}

#[derive(Debug, Clone)]
pub struct PolytopeCover {
    r: usize,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    /// Flat vertex coordinates, `r` per vertex.
    coords: Vec<f64>,
    incidence: BitMatrix,
    adjacency: Vec<Vec<u32>>,
    /// Cached objective values; NaN marks "not evaluated yet".
    values: Vec<f64>,
    vertex_cap: usize,
    tols: Tolerances,
}

#[derive(PartialEq, Clone, Copy)]
enum Class {
    Violating,
    Tight,
    Kept,
}

impl PolytopeCover {
    /// Axis-aligned box `prod_k [lo_k, hi_k]` with its `2^r` corners.
    /// Degenerate intervals are widened slightly so the corner set has full
    /// cardinality. `vertex_cap` bounds the vertex count for the lifetime of
    /// the cover.
    pub fn init_box(bounds: &[(f64, f64)], vertex_cap: usize, tols: Tolerances) -> Result<Self> {
        let r = bounds.len();
        if r == 0 {
            return Err(GwError::InvalidArgument("empty bounds".into()));
        }
        // vertex indices are u32 internally
        if r > 31 {
            return Err(GwError::ProjDimTooLarge { r, cap: 31 });
        }
        let vertex_cap = vertex_cap.min(u32::MAX as usize);
        let corners = 1usize << r;
        if corners > vertex_cap {
            return Err(GwError::VertexCapExceeded {
                count: corners,
                cap: vertex_cap,
            });
        }
        let mut lo = vec![0.0; r];
        let mut hi = vec![0.0; r];
        for (k, &(a, b)) in bounds.iter().enumerate() {
            if !a.is_finite() || !b.is_finite() || b < a {
                return Err(GwError::InvalidArgument(format!(
                    "bad interval [{a}, {b}] for coordinate {k}"
                )));
            }
            let width_min = tols.eq * (1.0 + a.abs().max(b.abs()));
            if b - a <= width_min {
                let mid = 0.5 * (a + b);
                let half = width_min.max(1e-12);
                lo[k] = mid - half;
                hi[k] = mid + half;
            } else {
                lo[k] = a;
                hi[k] = b;
            }
        }

        // constraint 2k: x_k <= hi_k;  constraint 2k+1: -x_k <= -lo_k
        let mut normals = Vec::with_capacity(2 * r);
        let mut offsets = Vec::with_capacity(2 * r);
        for k in 0..r {
            let mut up = vec![0.0; r];
            up[k] = 1.0;
            normals.push(up);
            offsets.push(hi[k]);
            let mut down = vec![0.0; r];
            down[k] = -1.0;
            normals.push(down);
            offsets.push(-lo[k]);
        }

        let mut incidence = BitMatrix::new(2 * r);
        let mut coords = Vec::with_capacity(corners * r);
        let mut adjacency = Vec::with_capacity(corners);
        for mask in 0..corners {
            let row = incidence.push_row();
            for k in 0..r {
                if mask >> k & 1 == 1 {
                    coords.push(hi[k]);
                    incidence.set(row, 2 * k);
                } else {
                    coords.push(lo[k]);
                    incidence.set(row, 2 * k + 1);
                }
            }
            let mut nbrs: Vec<u32> = (0..r).map(|k| (mask ^ (1 << k)) as u32).collect();
            nbrs.sort_unstable();
            adjacency.push(nbrs);
        }

        Ok(PolytopeCover {
            r,
            normals,
            offsets,
            coords,
            incidence,
            adjacency,
            values: vec![f64::NAN; corners],
            vertex_cap,
            tols,
        })
    }

    #[must_use]
    pub fn r(&self) -> usize {
        self.r
    }

    #[must_use]
    pub fn n_vertices(&self) -> usize {
        self.values.len()
    }

    #[must_use]
    pub fn n_constraints(&self) -> usize {
        self.offsets.len()
    }

    #[must_use]
    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.r..(i + 1) * self.r]
    }

    #[must_use]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    /// Indices of the constraints vertex `i` satisfies with equality.
    #[must_use]
    pub fn tight_constraints(&self, i: usize) -> Vec<usize> {
        self.incidence.row_indices(i)
    }

    /// Whether `x` satisfies every constraint within the feasibility slack.
    #[must_use]
    pub fn contains(&self, x: &[f64]) -> bool {
        self.normals.iter().zip(&self.offsets).all(|(a, &b)| {
            let s: f64 = a.iter().zip(x).map(|(u, v)| u * v).sum();
            s <= b + self.tols.feas * (1.0 + b.abs() + s.abs())
        })
    }

    /// Whether an existing constraint already matches `cut` (normal and
    /// offset equal within the dedupe tolerance, component-wise relative).
    #[must_use]
    pub fn is_duplicate(&self, cut: &HalfspaceCut) -> bool {
        let normal = cut.packed_normal();
        let close = |a: f64, b: f64| (a - b).abs() <= self.tols.dedupe * (1.0 + b.abs());
        'constraints: for (n, &b) in self.normals.iter().zip(&self.offsets) {
            if !close(b, cut.beta) {
                continue;
            }
            for (&x, &y) in n.iter().zip(&normal) {
                if !close(x, y) {
                    continue 'constraints;
                }
            }
            return true;
        }
        false
    }

    /// Adds the halfspace `normal . x <= beta` and restores the vertex
    /// representation. Returns how many vertices were removed and created.
    pub fn add_cut(&mut self, cut: &HalfspaceCut) -> Result<CutReport> {
        self.add_cut_raw(&cut.packed_normal(), cut.beta)
    }

    pub fn add_cut_raw(&mut self, normal: &[f64], beta: f64) -> Result<CutReport> {
        if normal.len() != self.r {
            return Err(GwError::InvalidArgument(format!(
                "cut normal has {} coordinates, cover has r = {}",
                normal.len(),
                self.r
            )));
        }
        if !beta.is_finite() || normal.iter().any(|v| !v.is_finite()) {
            return Err(GwError::InvalidArgument("non-finite cut".into()));
        }
        if normal.iter().all(|&v| v == 0.0) {
            // degenerate halfspace: either a tautology or an empty set
            return if beta >= 0.0 {
                Ok(CutReport {
                    n_removed: 0,
                    n_added: 0,
                })
            } else {
                Err(GwError::InfeasibleCut)
            };
        }

        let nv = self.n_vertices();
        let scores = self.score_vertices(normal);
        let mut classes = vec![Class::Kept; nv];
        let mut n_violating = 0usize;
        let mut tight_idx: Vec<u32> = Vec::new();
        for i in 0..nv {
            let s = scores[i];
            let scale = 1.0 + beta.abs() + s.abs();
            if (s - beta).abs() <= self.tols.eq * scale {
                classes[i] = Class::Tight;
                tight_idx.push(i as u32);
            } else if s > beta + self.tols.feas * scale {
                classes[i] = Class::Violating;
                n_violating += 1;
            }
        }

        if n_violating == 0 {
            // Nothing to remove; just record the constraint and mark the
            // touching vertices tight on it.
            let col = self.push_constraint(normal, beta);
            for &i in &tight_idx {
                self.incidence.set(i as usize, col);
            }
            self.relink_on_plane(&tight_idx);
            return Ok(CutReport {
                n_removed: 0,
                n_added: 0,
            });
        }
        if n_violating + tight_idx.len() == nv && tight_idx.is_empty() {
            return Err(GwError::InfeasibleCut);
        }

        // --- generate clip candidates on (violating, kept-strict) edges ---
        struct Candidate {
            coords: Vec<f64>,
            words: Vec<u64>, // incidence at the pre-cut stride
            parents: Vec<u32>,
        }
        let quantum = {
            let max_abs = self
                .coords
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            self.tols.dedupe * (1.0 + max_abs)
        };
        let key_of = |coords: &[f64]| -> Vec<i64> {
            coords
                .iter()
                .map(|&v| (v / quantum).round() as i64)
                .collect()
        };
        enum Target {
            Existing(u32),
            Fresh(usize),
        }
        let mut candidates: Vec<Candidate> = Vec::new();
        let mut by_key: HashMap<Vec<i64>, Target> = HashMap::new();
        for &t in &tight_idx {
            by_key.insert(key_of(self.vertex(t as usize)), Target::Existing(t));
        }
        let mut extra_bits_for_existing: Vec<(u32, Vec<u64>)> = Vec::new();
        for i in 0..nv {
            if classes[i] != Class::Violating {
                continue;
            }
            for &j in &self.adjacency[i] {
                let j = j as usize;
                if classes[j] != Class::Kept {
                    continue;
                }
                let (si, sj) = (scores[i], scores[j]);
                let lambda = ((beta - sj) / (si - sj)).clamp(0.0, 1.0);
                let (xi, xj) = (self.vertex(i), self.vertex(j));
                let coords: Vec<f64> = xi
                    .iter()
                    .zip(xj)
                    .map(|(a, b)| b + lambda * (a - b))
                    .collect();
                let words = self.incidence.and_rows(i, j);
                match by_key.entry(key_of(&coords)) {
                    std::collections::hash_map::Entry::Occupied(e) => match e.get() {
                        Target::Existing(t) => extra_bits_for_existing.push((*t, words)),
                        Target::Fresh(c) => {
                            let cand = &mut candidates[*c];
                            for (dst, src) in cand.words.iter_mut().zip(&words) {
                                *dst |= src;
                            }
                            if !cand.parents.contains(&(j as u32)) {
                                cand.parents.push(j as u32);
                            }
                        }
                    },
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(Target::Fresh(candidates.len()));
                        candidates.push(Candidate {
                            coords,
                            words,
                            parents: vec![j as u32],
                        });
                    }
                }
            }
        }

        let kept_count = nv - n_violating;
        if kept_count + candidates.len() > self.vertex_cap {
            return Err(GwError::VertexCapExceeded {
                count: kept_count + candidates.len(),
                cap: self.vertex_cap,
            });
        }

        // --- commit: new constraint column, bits for touching vertices ---
        let col = self.push_constraint(normal, beta);
        for &i in &tight_idx {
            self.incidence.set(i as usize, col);
        }
        for (t, words) in extra_bits_for_existing {
            // a clip landed exactly on an existing on-plane vertex: it also
            // becomes tight on the clipped edge's constraints
            for (ci, w) in words.iter().enumerate() {
                let mut bits = *w;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    self.incidence.set(t as usize, ci * 64 + b);
                    bits &= bits - 1;
                }
            }
        }

        // --- compact away the violating vertices ---
        let keep: Vec<bool> = classes.iter().map(|c| *c != Class::Violating).collect();
        let remap = self.incidence.retain_rows(&keep);
        let mut new_coords = Vec::with_capacity(kept_count * self.r);
        let mut new_values = Vec::with_capacity(kept_count);
        let mut new_adjacency = Vec::with_capacity(kept_count);
        for i in 0..nv {
            if keep[i] {
                new_coords.extend_from_slice(&self.coords[i * self.r..(i + 1) * self.r]);
                new_values.push(self.values[i]);
                let mut nbrs: Vec<u32> = self.adjacency[i]
                    .iter()
                    .filter_map(|&j| remap[j as usize].map(|nj| nj as u32))
                    .collect();
                nbrs.sort_unstable();
                new_adjacency.push(nbrs);
            }
        }
        self.coords = new_coords;
        self.values = new_values;
        self.adjacency = new_adjacency;

        // --- append the new vertices ---
        let n_added = candidates.len();
        let mut plane: Vec<u32> = tight_idx
            .iter()
            .map(|&t| remap[t as usize].expect("tight vertices survive") as u32)
            .collect();
        for cand in candidates {
            let idx = self.incidence.push_row();
            debug_assert_eq!(idx, self.values.len());
            // pad the pre-cut words to the current stride, then set the cut bit
            for (ci, w) in cand.words.iter().enumerate() {
                let mut bits = *w;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    self.incidence.set(idx, ci * 64 + b);
                    bits &= bits - 1;
                }
            }
            self.incidence.set(idx, col);
            self.coords.extend_from_slice(&cand.coords);
            self.values.push(f64::NAN);
            self.adjacency.push(Vec::new());
            for p in cand.parents {
                let pj = remap[p as usize].expect("kept parent survives") as u32;
                self.link(idx as u32, pj);
            }
            plane.push(idx as u32);
        }

        self.relink_on_plane(&plane);

        Ok(CutReport {
            n_removed: n_violating,
            n_added,
        })
    }

    /// Minimum of `f` over the vertex set, with per-vertex caching (valid as
    /// long as `f` does not change between calls; see
    /// [`PolytopeCover::invalidate_values`]). Ties resolve to the lowest
    /// vertex index.
    pub fn min_vertex_cached<F: Fn(&[f64]) -> f64>(&mut self, f: F) -> Result<(usize, f64)> {
        if self.n_vertices() == 0 {
            return Err(GwError::EmptyCover);
        }
        for i in 0..self.values.len() {
            if self.values[i].is_nan() {
                self.values[i] = f(self.vertex(i));
            }
        }
        let mut best = 0usize;
        for i in 1..self.values.len() {
            if self.values[i] < self.values[best] {
                best = i;
            }
        }
        Ok((best, self.values[best]))
    }

    /// Drops all cached objective values (call when the objective changes).
    pub fn invalidate_values(&mut self) {
        for v in &mut self.values {
            *v = f64::NAN;
        }
    }

    /// Diagnostic JSON dump of the full cover.
    #[must_use]
    pub fn dump_json(&self) -> String {
        #[derive(Serialize)]
        struct ConstraintDump<'a> {
            normal: &'a [f64],
            offset: f64,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            r: usize,
            n_constraints: usize,
            n_vertices: usize,
            constraints: Vec<ConstraintDump<'a>>,
            vertices: Vec<&'a [f64]>,
            tight: Vec<Vec<usize>>,
            adjacency: &'a [Vec<u32>],
        }
        let dump = Dump {
            r: self.r,
            n_constraints: self.n_constraints(),
            n_vertices: self.n_vertices(),
            constraints: self
                .normals
                .iter()
                .zip(&self.offsets)
                .map(|(n, &b)| ConstraintDump {
                    normal: n,
                    offset: b,
                })
                .collect(),
            vertices: (0..self.n_vertices()).map(|i| self.vertex(i)).collect(),
            tight: (0..self.n_vertices())
                .map(|i| self.tight_constraints(i))
                .collect(),
            adjacency: &self.adjacency,
        };
        serde_json::to_string_pretty(&dump).expect("dump serialization cannot fail")
    }

    // ---- internals -----------------------------------------------------

    fn score_vertices(&self, normal: &[f64]) -> Vec<f64> {
        let r = self.r;
        let dot = |i: usize| -> f64 {
            self.coords[i * r..(i + 1) * r]
                .iter()
                .zip(normal)
                .map(|(a, b)| a * b)
                .sum()
        };
        #[cfg(feature = "parallel")]
        if self.n_vertices() >= 4096 {
            return (0..self.n_vertices()).into_par_iter().map(dot).collect();
        }
        (0..self.n_vertices()).map(dot).collect()
    }

    fn push_constraint(&mut self, normal: &[f64], beta: f64) -> usize {
        self.normals.push(normal.to_vec());
        self.offsets.push(beta);
        self.incidence.push_col()
    }

    fn link(&mut self, a: u32, b: u32) {
        if a == b {
            return;
        }
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adjacency[x as usize];
            if let Err(pos) = list.binary_search(&y) {
                list.insert(pos, y);
            }
        }
    }

    /// Recomputes adjacency among the vertices lying on the newest cut
    /// hyperplane: any pair sharing at least `r - 1` tight constraints is
    /// connected.
    fn relink_on_plane(&mut self, plane: &[u32]) {
        if plane.len() < 2 {
            return;
        }
        let need = (self.r - 1) as u32;
        let find = |p: usize| -> Vec<u32> {
            let a = plane[p];
            let mut out = Vec::new();
            for &b in &plane[p + 1..] {
                if self.incidence.shared_count(a as usize, b as usize) >= need {
                    out.push(b);
                }
            }
            out
        };
        #[cfg(feature = "parallel")]
        let lists: Vec<Vec<u32>> = if plane.len() >= 512 {
            (0..plane.len()).into_par_iter().map(find).collect()
        } else {
            (0..plane.len()).map(find).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let lists: Vec<Vec<u32>> = (0..plane.len()).map(find).collect();
        for (p, list) in lists.into_iter().enumerate() {
            for b in list {
                self.link(plane[p], b);
            }
        }
    }
}
