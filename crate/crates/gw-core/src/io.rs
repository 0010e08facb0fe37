//! Shared text-format helpers: float formatting that survives a round trip,
//! and small parsing utilities used by the cloud and report formats.

use crate::error::{GwError, Result};

/// Format with 17 significant digits; parsing the result recovers the exact
/// same f64 bit pattern.
#[must_use]
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| GwError::Parse(format!("bad float for {what}: {s:?} ({e})")))
}

pub fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|e| GwError::Parse(format!("bad integer for {what}: {s:?} ({e})")))
}
