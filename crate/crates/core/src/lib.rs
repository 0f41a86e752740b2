//! Upper bounds on the success probability of Hardy- and Cabello-type
//! nonlocality arguments over the no-signaling polytope, under the
//! Information Causality, Macroscopic Locality, and Local Orthogonality
//! principles, for every local-randomness configuration.
//!
//! The crate is organised bottom-up:
//!
//! * [`boxes`] — algebra of bipartite two-input/two-output correlation
//!   boxes: vertices, convex decompositions, marginals, validity checks.
//! * [`principles`] — the three principle constraint families as signed
//!   residual sets (feasible iff every residual ≤ 0).
//! * [`optimizer`] — multistart augmented-Lagrangian maximization over a
//!   coefficient simplex with linear equalities and smooth inequalities.
//! * [`scenarios`] — problem builders for each argument × principle ×
//!   local-randomness case, table assembly, Euclidean distances.
//! * [`oracle`] — an independent brute-force sampler that witnesses each
//!   optimum from below and cross-checks the constraint evaluators.
//!
//! Numeric kernels in [`boxes`] and [`principles`] are generic over the
//! scalar type via [`num_traits::Float`]; the solver and samplers are
//! `f64`-only. Concrete `f64` aliases for the common types live at the
//! crate root.

pub mod boxes;
pub mod oracle;
pub mod optimizer;
pub mod principles;
pub mod scenarios;

/// Tolerances used across the crate. Each constant documents the single
/// decision it encodes; modules reference these rather than inlining
/// magic numbers.
pub mod tol {
    /// Simplex membership: accept coefficient sums within this of 1.
    /// Optimizer iterates drift slightly off the simplex between
    /// projections.
    pub const SIMPLEX_SUM: f64 = 1e-9;

    /// Simplex membership: coefficients may undershoot 0 by at most this
    /// much; anything in `[-SIMPLEX_NEG, 0)` is clipped to 0.
    pub const SIMPLEX_NEG: f64 = 1e-12;

    /// Feasibility threshold for principle residuals and solver
    /// constraints (equalities and inequalities alike).
    pub const CONSTRAINT: f64 = 1e-8;

    /// Central finite-difference step for solver gradients.
    pub const FD_STEP: f64 = 1e-7;

    /// Guard for the arcsine criterion: squared one-party correlators are
    /// clamped to `1 - ML_CLAMP` so the denominator stays positive on
    /// deterministic boxes; this matches the limiting behaviour.
    pub const ML_CLAMP: f64 = 1e-12;

    /// Round-trip agreement required between a box and its 8-parameter
    /// form, and between the two decomposition→parameter paths.
    pub const ROUNDTRIP: f64 = 1e-12;

    /// Default lower bound standing in for the strict `q1 > 0` condition
    /// of the Cabello objective. Strict inequalities are not expressible
    /// to a numerical solver; this shifts optima by at most `2 * EPS_Q`.
    pub const EPS_Q: f64 = 1e-6;
}

pub use boxes::{
    cabello_box, check_box, fit_cabello, fit_hardy, from_ns_params, hardy_box, hardy_ns_params,
    cabello_ns_params, local_vertex, marginals, nonlocal_vertex, to_ns_params, BoxError,
    CabelloCoeffs, HardyCoeffs, JointBox, Marginals, NSParams, ValidityReport,
};
pub use principles::{
    ic_residuals, lo_cabello_residuals, lo_hardy_residuals, ml_residual, ResidualSet,
};
pub use optimizer::{
    maximize, sample_starts, ConstrainedProblem, OptResult, SolverConfig, SolverError,
};
pub use oracle::{ic_residuals_correlator, polytope_vertices, sample_max, OracleResult};
pub use scenarios::{
    build_problem, case_lr, euclidean_distance, lr_equalities, run_suite, Argument, CaseRow,
    LRSelection, Principle, ScenarioError, CASE_COUNT, CASE_ORDER,
};

/// `f64` aliases for the generic kernel types.
pub type JointBox64 = JointBox<f64>;
pub type NSParams64 = NSParams<f64>;
pub type HardyCoeffs64 = HardyCoeffs<f64>;
pub type CabelloCoeffs64 = CabelloCoeffs<f64>;
pub type Marginals64 = Marginals<f64>;
pub type ValidityReport64 = ValidityReport<f64>;
pub type ResidualSet64 = ResidualSet<f64>;
