//! Certified global optimization of the Gromov-Wasserstein (GW) discrepancy
//! between two point clouds of equal cardinality in low-dimensional Euclidean
//! space, with squared Euclidean distances as the ground cost.
//!
//! For clouds `x_1..x_n` in R^lx and `y_1..y_n` in R^ly the discrepancy is the
//! minimum over permutation matrices G of
//!
//! ```text
//!   (1/2) * sum_{i,j,k,l} (|x_i - x_j|^2 - |y_k - y_l|^2)^2 G_ik G_jl ,
//! ```
//!
//! a quadratic assignment problem. Because the squared-distance matrices have
//! rank at most dim + 2, the quadratic term factors through the small matrix
//! `W = 2 X G Y^T` and a scalar linear term, so the problem projects onto
//! `r = lx*ly + 1` dimensions. The solver ([`solver`]) runs a cutting-plane
//! scheme in that projected space: it maintains an outer polytope cover of the
//! feasible image ([`polytope`]), minimizes the concave projected objective
//! over the cover's vertices for a lower bound, and prices each cut with a
//! linear assignment solve ([`assignment`]) that simultaneously produces a
//! feasible permutation for an upper bound. Upper and lower bounds tighten
//! until the requested gap is certified.
//!
//! [`baselines`] provides exhaustive enumeration for tiny instances and a
//! conditional-gradient local search; [`synth`] generates the synthetic cloud
//! families used by the benchmark harness.

pub mod assignment;
pub mod baselines;
pub mod bitset;
pub mod cloud;
pub mod coupling;
pub mod error;
pub mod instance;
pub mod io;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod polytope;
pub mod solver;
pub mod synth;
pub mod timing;

pub use baselines::LocalSearchReport;
pub use cloud::PointCloud;
pub use coupling::{Coupling, Permutation};
pub use error::{GwError, Result};
pub use instance::GwInstance;
pub use polytope::{CutReport, HalfspaceCut, PolytopeCover, ProjPoint};
pub use solver::{
    CutEvent, GapMode, SolveResult, SolveStatus, SolveTrace, SolverConfig, TraceRecord,
};

/// Hard default on the ambient dimension of input clouds. The projected space
/// has dimension `lx*ly + 1` and vertex enumeration is exponential in it, so
/// the solver is only practical for very small dimensions. Callers that want
/// to experiment beyond this must opt in explicitly.
pub const DIM_MAX_DEFAULT: usize = 3;

/// Cap on the projected dimension `r = lx*ly + 1` accepted by the solver
/// unless explicitly overridden.
pub const PROJ_DIM_CAP: usize = 10;

/// Tolerances used across the crate. All comparisons against quantities with
/// physical scale multiply these by `1 + scale` of the data involved.
pub mod tol {
    /// Classifying a vertex as lying on a hyperplane: `|a.x - b| <= EQ * (1 + |b|)`.
    pub const EQ: f64 = 1e-9;
    /// Feasibility slack when testing `a.x <= b`: same form as [`EQ`].
    pub const FEAS: f64 = 1e-9;
    /// Coordinate quantum for deduplicating polytope vertices.
    pub const DEDUPE: f64 = 1e-7;
    /// Row/column sum slack for validating doubly stochastic couplings.
    pub const MARGINAL: f64 = 1e-9;
    /// Denominator floor for relative gaps: `(U - L) / max(|U|, REL_FLOOR)`.
    pub const REL_FLOOR: f64 = 1e-12;
}

/// Bundle of the numeric tolerances, overridable through solver config.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hyperplane tightness classification.
    pub eq: f64,
    /// Feasibility slack.
    pub feas: f64,
    /// Vertex deduplication quantum.
    pub dedupe: f64,
    /// Coupling marginal slack.
    pub marginal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eq: tol::EQ,
            feas: tol::FEAS,
            dedupe: tol::DEDUPE,
            marginal: tol::MARGINAL,
        }
    }
}
