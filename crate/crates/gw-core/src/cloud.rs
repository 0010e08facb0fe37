//! Point clouds in low-dimensional Euclidean space, stored as a `dim x n`
//! matrix whose columns are the points, plus plain-text save/load.
//!
//! Two formats are supported and round-trip bit-exactly:
//!
//! * CSV: a literal header line `dim,n`, a line with the two integers, then
//!   `n` rows of `dim` comma-separated coordinates.
//! * JSON: `{"dim": .., "n": .., "points": [[..], ..]}` with one inner array
//!   per point.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::coupling::Permutation;
use crate::error::{GwError, Result};
use crate::io::{float17, parse_f64, parse_usize};
use crate::DIM_MAX_DEFAULT;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    /// Shape `(dim, n)`; column `i` is point `i`.
    coords: Array2<f64>,
}

impl PointCloud {
    /// Validates shape and finiteness and enforces the default dimension
    /// limit [`DIM_MAX_DEFAULT`].
    pub fn new(coords: Array2<f64>) -> Result<Self> {
        Self::with_dim_limit(coords, DIM_MAX_DEFAULT)
    }

    /// Like [`PointCloud::new`] but with an explicit dimension limit, for
    /// callers that knowingly go beyond the supported regime.
    pub fn with_dim_limit(coords: Array2<f64>, dim_max: usize) -> Result<Self> {
        let (dim, n) = coords.dim();
        if dim == 0 || n == 0 {
            return Err(GwError::EmptyCloud);
        }
        if dim > dim_max {
            return Err(GwError::DimensionTooLarge { dim, max: dim_max });
        }
        for ((d, i), &v) in coords.indexed_iter() {
            if !v.is_finite() {
                return Err(GwError::NonFinite {
                    point: i,
                    component: d,
                });
            }
        }
        Ok(PointCloud { coords })
    }

    /// Builds from per-point rows (the transpose of the internal layout).
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        Self::new(points_to_coords(points)?)
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.coords.nrows()
    }

    /// Number of points.
    #[must_use]
    pub fn len(&self) -> usize {
        self.coords.ncols()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.coords.ncols() == 0
    }

    #[must_use]
    pub fn coords(&self) -> ArrayView2<'_, f64> {
        self.coords.view()
    }

    #[must_use]
    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.coords.column(i)
    }

    /// Squared Euclidean norms of the points.
    #[must_use]
    pub fn squared_norms(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.point(i).iter().map(|v| v * v).sum())
            .collect()
    }

    /// Dense matrix of pairwise squared Euclidean distances. Computed from
    /// coordinate differences directly, so it is exactly symmetric with a
    /// zero diagonal and free of cancellation error.
    #[must_use]
    pub fn squared_distance_matrix(&self) -> Array2<f64> {
        let n = self.len();
        let mut c = Array2::zeros((n, n));
        for i in 0..n {
            let pi = self.point(i);
            for j in (i + 1)..n {
                let d2: f64 = pi
                    .iter()
                    .zip(self.point(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                c[[i, j]] = d2;
                c[[j, i]] = d2;
            }
        }
        c
    }

    /// Cloud with columns reordered so that new point `i` is old point
    /// `perm[i]`.
    pub fn permuted(&self, perm: &Permutation) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(GwError::SizeMismatch(perm.len(), self.len()));
        }
        let mut coords = Array2::zeros((self.dim(), self.len()));
        for (i, &src) in perm.as_slice().iter().enumerate() {
            coords.column_mut(i).assign(&self.coords.column(src));
        }
        Ok(PointCloud { coords })
    }

    // ---- text formats -------------------------------------------------

    #[must_use]
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("dim,n\n");
        out.push_str(&format!("{},{}\n", self.dim(), self.len()));
        for i in 0..self.len() {
            let row: Vec<String> = self.point(i).iter().map(|&v| float17(v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::from_csv_str_with_limit(s, DIM_MAX_DEFAULT)
    }

    pub fn from_csv_str_with_limit(s: &str, dim_max: usize) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| GwError::Parse("empty cloud file".into()))?;
        if header.trim() != "dim,n" {
            return Err(GwError::Parse(format!(
                "expected header line 'dim,n', got {header:?}"
            )));
        }
        let sizes = lines
            .next()
            .ok_or_else(|| GwError::Parse("missing size line".into()))?;
        let mut it = sizes.split(',');
        let dim = parse_usize(it.next().unwrap_or(""), "dim")?;
        let n = parse_usize(
            it.next().ok_or_else(|| GwError::Parse("size line needs 'dim,n'".into()))?,
            "n",
        )?;
        if it.next().is_some() {
            return Err(GwError::Parse("size line has trailing fields".into()));
        }
        let mut points = Vec::with_capacity(n);
        for (k, line) in lines.enumerate() {
            if k >= n {
                return Err(GwError::Parse(format!("more than {n} data rows")));
            }
            let row: Result<Vec<f64>> = line
                .split(',')
                .map(|f| parse_f64(f, &format!("point {k}")))
                .collect();
            let row = row?;
            if row.len() != dim {
                return Err(GwError::Parse(format!(
                    "point {k} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
            points.push(row);
        }
        if points.len() != n {
            return Err(GwError::Parse(format!(
                "expected {n} data rows, got {}",
                points.len()
            )));
        }
        Self::with_dim_limit(points_to_coords(&points)?, dim_max)
    }

    #[must_use]
    pub fn to_json_string(&self) -> String {
        let file = CloudJson {
            dim: self.dim(),
            n: self.len(),
            points: (0..self.len()).map(|i| self.point(i).to_vec()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("cloud serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_str_with_limit(s, DIM_MAX_DEFAULT)
    }

    pub fn from_json_str_with_limit(s: &str, dim_max: usize) -> Result<Self> {
        let file: CloudJson = serde_json::from_str(s)?;
        if file.points.len() != file.n {
            return Err(GwError::Parse(format!(
                "json cloud declares n = {} but has {} points",
                file.n,
                file.points.len()
            )));
        }
        let coords = points_to_coords(&file.points)?;
        if coords.nrows() != file.dim {
            return Err(GwError::Parse(format!(
                "json cloud declares dim = {} but points have {} coordinates",
                file.dim,
                coords.nrows()
            )));
        }
        Self::with_dim_limit(coords, dim_max)
    }

    /// Saves in the format implied by the file extension (`.json` or CSV
    /// otherwise).
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = if is_json(path) {
            self.to_json_string()
        } else {
            self.to_csv_string()
        };
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_limit(path, DIM_MAX_DEFAULT)
    }

    pub fn load_with_limit(path: &Path, dim_max: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if is_json(path) {
            Self::from_json_str_with_limit(&text, dim_max)
        } else {
            Self::from_csv_str_with_limit(&text, dim_max)
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn points_to_coords(points: &[Vec<f64>]) -> Result<Array2<f64>> {
    let n = points.len();
    if n == 0 {
        return Err(GwError::EmptyCloud);
    }
    let dim = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(GwError::Parse(format!(
                "point {i} has {} coordinates, expected {dim}",
                p.len()
            )));
        }
    }
    if dim == 0 {
        return Err(GwError::EmptyCloud);
    }
    let mut coords = Array2::zeros((dim, n));
    for (i, p) in points.iter().enumerate() {
        for (d, &v) in p.iter().enumerate() {
            coords[[d, i]] = v;
        }
    }
    Ok(coords)
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    dim: usize,
    n: usize,
    points: Vec<Vec<f64>>,
}
