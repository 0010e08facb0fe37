//! Synthetic cloud families used by the benchmark harness and the demo:
//! uniform samples from the unit ball and centered Gaussians with diagonal
//! covariance, plus random orthogonal maps for building isometric pairs.
//!
//! All sampling is driven by a caller-provided RNG or by the `seed` field of
//! a [`GeneratorSpec`] (hashed through ChaCha8), so every artifact is
//! reproducible from its spec.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{GwError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Uniform distribution on the unit ball.
    UniformBall,
    /// Centered Gaussian with diagonal covariance (`cov_diag`).
    Gaussian,
}

/// A reproducible recipe for one synthetic cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub dim: usize,
    pub n: usize,
    /// Diagonal of the covariance matrix; required iff `kind` is Gaussian,
    /// with `cov_diag.len() == dim`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov_diag: Option<Vec<f64>>,
    pub seed: u64,
}

impl GeneratorSpec {
    #[must_use]
    pub fn uniform_ball(dim: usize, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::UniformBall,
            dim,
            n,
            cov_diag: None,
            seed,
        }
    }

    #[must_use]
    pub fn gaussian(cov_diag: Vec<f64>, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::Gaussian,
            dim: cov_diag.len(),
            n,
            cov_diag: Some(cov_diag),
            seed,
        }
    }

    /// Named families accepted on the command line: `uniform` (unit ball) or
    /// `normal1` / `normal2` / `normal3`, Gaussians with per-axis standard
    /// deviations `(1, .., 1)`, `(1, 1, 0.1)` and `(1, 0.5, 0.1)` (so
    /// covariance diagonals `I`, `(1, 1, 0.01)` and `(1, 0.25, 0.01)`).
    /// `normal2`/`normal3` fix the dimension at 3; the flat third axis makes
    /// them reflection-dominated, the numerically easy 3D regime.
    pub fn from_family(name: &str, dim: usize, n: usize, seed: u64) -> Result<Self> {
        match name {
            "uniform" => Ok(Self::uniform_ball(dim, n, seed)),
            "normal1" => Ok(Self::gaussian(vec![1.0; dim], n, seed)),
            "normal2" => Ok(Self::gaussian(vec![1.0, 1.0, 0.01], n, seed)),
            "normal3" => Ok(Self::gaussian(vec![1.0, 0.25, 0.01], n, seed)),
            other => Err(GwError::InvalidArgument(format!(
                "unknown family {other:?}; expected uniform | normal1 | normal2 | normal3"
            ))),
        }
    }

    /// Compact label for report rows; avoids commas so it stays CSV-safe.
    #[must_use]
    pub fn label(&self) -> String {
        match self.kind {
            GeneratorKind::UniformBall => format!("uball-d{}", self.dim),
            GeneratorKind::Gaussian => {
                let cov = self
                    .cov_diag
                    .as_deref()
                    .unwrap_or(&[])
                    .iter()
                    .map(|v| format!("{v}"))
                    .collect::<Vec<_>>()
                    .join("_");
                format!("gauss-{cov}")
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.dim == 0 {
            return Err(GwError::InvalidArgument(
                "generator needs n >= 1 and dim >= 1".into(),
            ));
        }
        match (self.kind, &self.cov_diag) {
            (GeneratorKind::UniformBall, Some(_)) => Err(GwError::InvalidArgument(
                "cov_diag is only meaningful for gaussian clouds".into(),
            )),
            (GeneratorKind::Gaussian, None) => Err(GwError::InvalidArgument(
                "gaussian clouds need cov_diag".into(),
            )),
            (GeneratorKind::Gaussian, Some(cov)) => {
                if cov.len() != self.dim {
                    return Err(GwError::InvalidArgument(format!(
                        "cov_diag has {} entries but dim = {}",
                        cov.len(),
                        self.dim
                    )));
                }
                if cov.iter().any(|&v| !v.is_finite() || v <= 0.0) {
                    return Err(GwError::InvalidArgument(
                        "cov_diag entries must be positive and finite".into(),
                    ));
                }
                Ok(())
            }
            (GeneratorKind::UniformBall, None) => Ok(()),
        }
    }
}

/// Samples the cloud described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<PointCloud> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        GeneratorKind::UniformBall => uniform_ball_cloud(spec.n, spec.dim, &mut rng),
        GeneratorKind::Gaussian => {
            gaussian_cloud(spec.n, spec.cov_diag.as_deref().unwrap(), &mut rng)
        }
    }
}

/// `n` points uniform on the unit ball in `dim` dimensions: a normalized
/// Gaussian direction scaled by `U^(1/dim)`.
pub fn uniform_ball_cloud<R: Rng + ?Sized>(
    n: usize,
    dim: usize,
    rng: &mut R,
) -> Result<PointCloud> {
    let mut coords = Array2::zeros((dim, n));
    for i in 0..n {
        let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let mut norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        while norm < 1e-12 {
            // astronomically unlikely; resample rather than divide by ~0
            dir = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        }
        let radius = rng.random::<f64>().powf(1.0 / dim as f64);
        for d in 0..dim {
            coords[[d, i]] = radius * dir[d] / norm;
        }
    }
    PointCloud::with_dim_limit(coords, dim)
}

/// `n` centered Gaussian points with diagonal covariance `cov_diag`.
pub fn gaussian_cloud<R: Rng + ?Sized>(
    n: usize,
    cov_diag: &[f64],
    rng: &mut R,
) -> Result<PointCloud> {
    let dim = cov_diag.len();
    let std: Vec<f64> = cov_diag.iter().map(|v| v.sqrt()).collect();
    let mut coords = Array2::zeros((dim, n));
    for i in 0..n {
        for d in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            coords[[d, i]] = std[d] * z;
        }
    }
    PointCloud::with_dim_limit(coords, dim)
}

/// Haar-ish random orthogonal matrix via Gram-Schmidt on a Gaussian matrix
/// (with one re-orthogonalization pass for numerical hygiene).
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Array2<f64> {
    loop {
        let mut q: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let mut ok = true;
        for i in 0..dim {
            for _pass in 0..2 {
                for j in 0..i {
                    let proj: f64 = (0..dim).map(|d| q[i][d] * q[j][d]).sum();
                    for d in 0..dim {
                        q[i][d] -= proj * q[j][d];
                    }
                }
            }
            let norm: f64 = q[i].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for v in &mut q[i] {
                *v /= norm;
            }
        }
        if ok {
            let mut m = Array2::zeros((dim, dim));
            for (i, row) in q.iter().enumerate() {
                for (d, &v) in row.iter().enumerate() {
                    m[[i, d]] = v;
                }
            }
            return m;
        }
    }
}

/// Applies `p -> Q p + shift` to every point.
pub fn apply_isometry(
    cloud: &PointCloud,
    rotation: &Array2<f64>,
    shift: &[f64],
) -> Result<PointCloud> {
    let dim = cloud.dim();
    if rotation.dim() != (dim, dim) || shift.len() != dim {
        return Err(GwError::InvalidArgument(
            "isometry shape does not match cloud dimension".into(),
        ));
    }
    let mut coords = rotation.dot(&cloud.coords());
    for i in 0..cloud.len() {
        for d in 0..dim {
            coords[[d, i]] += shift[d];
        }
    }
    PointCloud::with_dim_limit(coords, dim)
}
