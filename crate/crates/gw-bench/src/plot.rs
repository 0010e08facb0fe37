//! Plot-ready exports from solver traces: parses the trace CSV written by
//! the `solve` and `bench` verbs and adds the derived relative-gap column,
//! optionally thinning rows for long runs. Rendering itself is out of scope;
//! the output is meant to be fed straight into any plotting tool.

use gw_core::io::{float17, parse_f64, parse_usize};
use gw_core::solver::relative_gap;
use gw_core::{GwError, Result};
use serde::{Deserialize, Serialize};

/// Header of the trace CSV produced by the solver.
pub const TRACE_COLUMNS: &str = "iter,lower,upper,gap,vertices,millis";
/// Header of the derived plot CSV.
pub const PLOT_COLUMNS: &str = "iter,lower,upper,gap,rel_gap,vertices,millis";

/// One trace row with the derived relative gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub iter: usize,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub rel_gap: f64,
    pub vertices: usize,
    pub millis: f64,
}

/// Parses a solver trace CSV and computes the relative gap per row.
pub fn parse_trace_csv(text: &str) -> Result<Vec<PlotRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| GwError::Parse("empty trace file".into()))?;
    if header.trim() != TRACE_COLUMNS {
        return Err(GwError::Parse(format!(
            "unexpected trace header {header:?}, expected {TRACE_COLUMNS:?}"
        )));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(GwError::Parse(format!(
                "trace row {k} has {} fields, expected 6",
                cells.len()
            )));
        }
        let lower = parse_f64(cells[1], "lower")?;
        let upper = parse_f64(cells[2], "upper")?;
        rows.push(PlotRow {
            iter: parse_usize(cells[0], "iter")?,
            lower,
            upper,
            gap: parse_f64(cells[3], "gap")?,
            rel_gap: relative_gap(lower, upper),
            vertices: parse_usize(cells[4], "vertices")?,
            millis: parse_f64(cells[5], "millis")?,
        });
    }
    Ok(rows)
}

/// Renders plot rows, keeping every `every`-th record plus the last one.
pub fn plot_rows_to_csv(rows: &[PlotRow], every: usize) -> Result<String> {
    if every == 0 {
        return Err(GwError::InvalidArgument("every must be at least 1".into()));
    }
    let mut out = String::from(PLOT_COLUMNS);
    out.push('\n');
    for (k, r) in rows.iter().enumerate() {
        if k % every != 0 && k + 1 != rows.len() {
            continue;
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.3}\n",
            r.iter,
            float17(r.lower),
            float17(r.upper),
            float17(r.gap),
            float17(r.rel_gap),
            r.vertices,
            r.millis
        ));
    }
    Ok(out)
}
