//! Persistable record of one benchmark run. A stored record carries the
//! generator specs, the method and its config, and the outcome including the
//! winning assignment, so anyone can reload it, regenerate the exact
//! instance, and recheck the claimed value.

use std::path::Path;

use gw_core::synth::{generate, GeneratorSpec};
use gw_core::{GwError, GwInstance, Permutation, Result};
use serde::{Deserialize, Serialize};

use crate::method::{Method, MethodOutcome, RunConfig};
use crate::SCHEMA_VERSION;

/// Host facts stored alongside results; informational only and never
/// compared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvMeta {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl EnvMeta {
    #[must_use]
    pub fn capture() -> Self {
        EnvMeta {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

/// One solved instance with everything needed to reproduce and recheck it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRun {
    pub schema_version: u32,
    pub spec_x: GeneratorSpec,
    pub spec_y: GeneratorSpec,
    pub method: Method,
    pub config: RunConfig,
    pub outcome: MethodOutcome,
    pub environment: EnvMeta,
}

impl BenchmarkRun {
    #[must_use]
    pub fn new(
        spec_x: GeneratorSpec,
        spec_y: GeneratorSpec,
        method: Method,
        config: RunConfig,
        outcome: MethodOutcome,
    ) -> Self {
        BenchmarkRun {
            schema_version: SCHEMA_VERSION,
            spec_x,
            spec_y,
            method,
            config,
            outcome,
            environment: EnvMeta::capture(),
        }
    }

    /// Rebuilds the instance from the stored specs and recomputes the
    /// discrepancy at the stored assignment. Errors when the recomputed
    /// value disagrees with the stored one, meaning the record does not
    /// describe the run it claims to.
    pub fn reverify(&self) -> Result<f64> {
        let x = generate(&self.spec_x)?;
        let y = generate(&self.spec_y)?;
        let inst = GwInstance::new(x, y)?;
        let perm = Permutation::new(self.outcome.assignment.clone())?;
        let value = inst.gw_value_lowrank_perm(&perm)?;
        let tol = 1e-9 * (1.0 + self.outcome.value.abs());
        if (value - self.outcome.value).abs() > tol {
            return Err(GwError::Verification(format!(
                "stored value {} but the assignment scores {value}",
                self.outcome.value
            )));
        }
        Ok(value)
    }

    #[must_use]
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("run serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let run: BenchmarkRun = serde_json::from_str(s)?;
        if run.schema_version != SCHEMA_VERSION {
            return Err(GwError::Parse(format!(
                "run record has schema version {}, expected {SCHEMA_VERSION}",
                run.schema_version
            )));
        }
        Ok(run)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}
