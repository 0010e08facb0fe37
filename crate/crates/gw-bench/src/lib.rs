//! Experiment harness behind the `gw-bench` binary: suite configs, result
//! tables, pairwise-distance jobs, and landmark selection.
//!
//! The library half keeps everything the command line does reusable and
//! testable: [`method`] dispatches one instance to the certified solver, the
//! local-search baseline, or exhaustive enumeration; [`suite`] expands a
//! config file into seeded runs and aggregates them deterministically;
//! [`pairwise`] fills all-pairs distance matrices; [`landmarks`] implements
//! greedy max-min subset selection under the GW distance; [`run`] persists
//! single runs so they can be reloaded and re-verified later; [`plot`]
//! derives plot-ready columns from solver traces.
//!
//! Every artifact that leaves this crate (run records, suite reports,
//! pairwise and landmark reports) carries [`SCHEMA_VERSION`] so future format
//! changes stay detectable, and every float written to CSV goes through
//! `float17`, which survives a parse round trip bit-exactly.

pub mod landmarks;
pub mod method;
pub mod pairwise;
pub mod plot;
pub mod run;
pub mod suite;

pub use landmarks::{greedy_subset, LandmarkReport};
pub use method::{run_method, Method, MethodOutcome, RunConfig};
pub use pairwise::{pairwise_matrix, PairEntry, PairwiseReport};
pub use run::{BenchmarkRun, EnvMeta};
pub use suite::{run_suite, CellAggregate, CellSpec, ResultRow, SuiteConfig, SuiteReport};

/// Version stamp on every persisted artifact; bump on breaking format change.
pub const SCHEMA_VERSION: u32 = 1;
