//! All-pairs distance jobs over a set of same-size clouds. Each unordered
//! pair is solved once; the matrix is symmetric by construction and the
//! diagonal is zero by definition. Per-pair failures leave a hole (NaN in
//! memory, null in JSON, empty cell in CSV) and are reported per entry.

use gw_core::io::float17;
use gw_core::{GwError, GwInstance, PointCloud, Result};
use serde::{Deserialize, Serialize};

use crate::method::{run_method, Method, RunConfig};
use crate::run::EnvMeta;
use crate::SCHEMA_VERSION;

/// Outcome of one unordered pair `(i, j)`, `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub i: usize,
    pub j: usize,
    pub value: Option<f64>,
    pub status: String,
    pub time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseReport {
    pub schema_version: u32,
    pub method: Method,
    pub n_clouds: usize,
    /// Row-major symmetric matrix; failed pairs hold NaN (null in JSON).
    pub matrix: Vec<Vec<f64>>,
    /// One entry per unordered pair, sorted by `(i, j)`.
    pub entries: Vec<PairEntry>,
    pub failures: usize,
    pub environment: EnvMeta,
}

impl PairwiseReport {
    #[must_use]
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Plain matrix CSV: `n` rows of `n` comma-separated values, no header;
    /// failed entries are empty.
    #[must_use]
    pub fn matrix_to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.matrix {
            let line: Vec<String> = row
                .iter()
                .map(|&v| if v.is_nan() { String::new() } else { float17(v) })
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Fills the GW distance matrix over `clouds` with the chosen backend,
/// solving each unordered pair once (in parallel when enabled). The same
/// `cfg` drives every pair, so results are reproducible from the inputs.
pub fn pairwise_matrix(
    clouds: &[PointCloud],
    method: Method,
    cfg: &RunConfig,
) -> Result<PairwiseReport> {
    if clouds.is_empty() {
        return Err(GwError::InvalidArgument("no clouds given".into()));
    }
    let n0 = clouds[0].len();
    for (k, c) in clouds.iter().enumerate() {
        if c.len() != n0 {
            return Err(GwError::SizeMismatch(n0, c.len()));
        }
        let _ = k;
    }

    let m = clouds.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();

    let solve_pair = |&(i, j): &(usize, usize)| -> PairEntry {
        let attempt = || -> Result<(f64, String, f64)> {
            let inst = GwInstance::new(clouds[i].clone(), clouds[j].clone())?;
            let out = run_method(&inst, method, cfg)?;
            Ok((out.value, out.status, out.time_ms))
        };
        match attempt() {
            Ok((value, status, time_ms)) => PairEntry {
                i,
                j,
                value: Some(value),
                status,
                time_ms,
                error: None,
            },
            Err(e) => PairEntry {
                i,
                j,
                value: None,
                status: "error".into(),
                time_ms: 0.0,
                error: Some(e.to_string()),
            },
        }
    };

    #[cfg(feature = "parallel")]
    let entries: Vec<PairEntry> = {
        use rayon::prelude::*;
        pairs.par_iter().map(solve_pair).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let entries: Vec<PairEntry> = pairs.iter().map(solve_pair).collect();

    let mut matrix = vec![vec![0.0f64; m]; m];
    let mut failures = 0usize;
    for e in &entries {
        let v = e.value.unwrap_or(f64::NAN);
        if e.value.is_none() {
            failures += 1;
        }
        matrix[e.i][e.j] = v;
        matrix[e.j][e.i] = v;
    }

    Ok(PairwiseReport {
        schema_version: SCHEMA_VERSION,
        method,
        n_clouds: m,
        matrix,
        entries,
        failures,
        environment: EnvMeta::capture(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gw_core::synth::{generate, GeneratorSpec};

    fn cloud(n: usize, seed: u64) -> PointCloud {
        generate(&GeneratorSpec::uniform_ball(2, n, seed)).unwrap()
    }

    #[test]
    fn identical_clouds_give_a_zero_matrix() {
        let c = cloud(6, 3);
        let report =
            pairwise_matrix(&[c.clone(), c], Method::Global, &RunConfig::default()).unwrap();
        let scale = 1e-8;
        assert_eq!(report.n_clouds, 2);
        for i in 0..2 {
            for j in 0..2 {
                assert!(report.matrix[i][j].abs() <= scale);
            }
        }
        assert_eq!(report.failures, 0);
    }

    #[test]
    fn global_agrees_with_brute_on_small_clouds() {
        let clouds: Vec<PointCloud> = (0..3).map(|k| cloud(5, 10 + k)).collect();
        let cfg = RunConfig::default();
        let global = pairwise_matrix(&clouds, Method::Global, &cfg).unwrap();
        let brute = pairwise_matrix(&clouds, Method::Brute, &cfg).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let (g, b) = (global.matrix[i][j], brute.matrix[i][j]);
                assert!((g - b).abs() <= 1e-8 * (1.0 + b.abs()), "({i},{j}): {g} vs {b}");
            }
        }
    }

    #[test]
    fn local_dominates_global_elementwise() {
        let clouds: Vec<PointCloud> = (0..4).map(|k| cloud(6, 20 + k)).collect();
        let cfg = RunConfig {
            local_starts: 3,
            ..RunConfig::default()
        };
        let global = pairwise_matrix(&clouds, Method::Global, &cfg).unwrap();
        let local = pairwise_matrix(&clouds, Method::Local, &cfg).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let (g, l) = (global.matrix[i][j], local.matrix[i][j]);
                assert!(l >= g - 1e-9 * (1.0 + g.abs()), "({i},{j}): local {l} < global {g}");
            }
        }
    }

    #[test]
    fn structure_diagonal_symmetry_entries() {
        let clouds: Vec<PointCloud> = (0..4).map(|k| cloud(5, 30 + k)).collect();
        let report = pairwise_matrix(&clouds, Method::Brute, &RunConfig::default()).unwrap();
        assert_eq!(report.entries.len(), 6);
        for (k, e) in report.entries.iter().enumerate() {
            assert!(e.i < e.j);
            if k > 0 {
                let prev = &report.entries[k - 1];
                assert!((prev.i, prev.j) < (e.i, e.j), "entries out of order");
            }
        }
        for i in 0..4 {
            assert_eq!(report.matrix[i][i], 0.0);
            for j in 0..4 {
                assert_eq!(
                    report.matrix[i][j].to_bits(),
                    report.matrix[j][i].to_bits()
                );
            }
        }
    }

    #[test]
    fn failures_leave_holes_and_are_counted() {
        // Brute force rejects n = 12, so every pair fails.
        let clouds: Vec<PointCloud> = (0..3).map(|k| cloud(12, 40 + k)).collect();
        let report = pairwise_matrix(&clouds, Method::Brute, &RunConfig::default()).unwrap();
        assert_eq!(report.failures, 3);
        for e in &report.entries {
            assert_eq!(e.value, None);
            assert_eq!(e.status, "error");
            assert!(e.error.as_deref().unwrap().contains("n <= 10"));
        }
        assert!(report.matrix[0][1].is_nan());
        assert_eq!(report.matrix[0][0], 0.0);

        // Holes serialize as null / empty cell.
        let json = report.to_json_string();
        assert!(json.contains("null"));
        let csv = report.matrix_to_csv();
        assert_eq!(csv.lines().next(), Some("0.0000000000000000e0,,"));
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let a = cloud(5, 50);
        let b = cloud(6, 51);
        match pairwise_matrix(&[a, b], Method::Brute, &RunConfig::default()) {
            Err(GwError::SizeMismatch(5, 6)) => {}
            other => panic!("expected size mismatch, got {other:?}"),
        }
    }

    #[test]
    fn report_json_round_trips() {
        let clouds: Vec<PointCloud> = (0..2).map(|k| cloud(4, 60 + k)).collect();
        let report = pairwise_matrix(&clouds, Method::Brute, &RunConfig::default()).unwrap();
        let back: PairwiseReport = serde_json::from_str(&report.to_json_string()).unwrap();
        assert_eq!(back.n_clouds, report.n_clouds);
        assert_eq!(
            back.matrix[0][1].to_bits(),
            report.matrix[0][1].to_bits()
        );
    }
}
