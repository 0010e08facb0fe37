//! Greedy max-min landmark selection under the GW distance: starting from a
//! chosen cloud, repeatedly pick the cloud farthest from the current set
//! (ties to the lowest index). Classic k-center greedy, so only distances to
//! selected landmarks are ever computed — `k` columns, not the full matrix.

use gw_core::io::float17;
use gw_core::{GwError, GwInstance, PointCloud, Result};
use serde::{Deserialize, Serialize};

use crate::method::{run_method, Method, RunConfig};
use crate::run::EnvMeta;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkReport {
    pub schema_version: u32,
    pub method: Method,
    /// Landmark indices in pick order; `selected[0]` is the seed cloud.
    pub selected: Vec<usize>,
    /// Cover radius `max_i min_{s in selected so far} d(i, s)` after each
    /// pick; nonincreasing in the number of landmarks.
    pub cover_radius: Vec<f64>,
    /// Distance features `features[i][j] = d(cloud_i, cloud_selected[j])`.
    pub features: Vec<Vec<f64>>,
    pub environment: EnvMeta,
}

impl LandmarkReport {
    #[must_use]
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Feature matrix CSV: one row per cloud, one column per landmark.
    #[must_use]
    pub fn features_to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.features {
            let line: Vec<String> = row.iter().map(|&v| float17(v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Selects `k` landmarks greedily, starting from `first`. Returns the picks,
/// the shrinking cover radii, and the full feature matrix against the
/// selected landmarks. Unlike the suite and pairwise drivers, a failed solve
/// here aborts the job: the greedy rule cannot act on missing distances.
pub fn greedy_subset(
    clouds: &[PointCloud],
    k: usize,
    first: usize,
    method: Method,
    cfg: &RunConfig,
) -> Result<LandmarkReport> {
    if clouds.is_empty() {
        return Err(GwError::InvalidArgument("no clouds given".into()));
    }
    if k == 0 || k > clouds.len() {
        return Err(GwError::InvalidArgument(format!(
            "k must be in 1..={}, got {k}",
            clouds.len()
        )));
    }
    if first >= clouds.len() {
        return Err(GwError::InvalidArgument(format!(
            "first landmark index {first} out of range for {} clouds",
            clouds.len()
        )));
    }
    let n0 = clouds[0].len();
    for c in clouds {
        if c.len() != n0 {
            return Err(GwError::SizeMismatch(n0, c.len()));
        }
    }

    let m = clouds.len();
    let distance_column = |s: usize| -> Result<Vec<f64>> {
        let one = |i: usize| -> Result<f64> {
            if i == s {
                return Ok(0.0);
            }
            let inst = GwInstance::new(clouds[i].clone(), clouds[s].clone())?;
            Ok(run_method(&inst, method, cfg)?.value)
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..m).into_par_iter().map(one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..m).map(one).collect()
        }
    };

    let mut selected = vec![first];
    let mut features: Vec<Vec<f64>> = vec![Vec::with_capacity(k); m];
    let mut min_dist = vec![f64::INFINITY; m];
    let mut cover_radius = Vec::with_capacity(k);

    loop {
        let column = distance_column(*selected.last().expect("nonempty"))?;
        for (i, &d) in column.iter().enumerate() {
            features[i].push(d);
            min_dist[i] = min_dist[i].min(d);
        }
        cover_radius.push(min_dist.iter().cloned().fold(0.0f64, f64::max));
        if selected.len() == k {
            break;
        }
        // Farthest unselected cloud; ties break to the lowest index. The
        // strict comparison keeps the first maximizer.
        let mut next = None;
        let mut best = f64::NEG_INFINITY;
        for i in 0..m {
            if !selected.contains(&i) && min_dist[i] > best {
                best = min_dist[i];
                next = Some(i);
            }
        }
        selected.push(next.expect("k <= number of clouds"));
    }

    Ok(LandmarkReport {
        schema_version: SCHEMA_VERSION,
        method,
        selected,
        cover_radius,
        features,
        environment: EnvMeta::capture(),
    })
}
