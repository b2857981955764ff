//! Iterative hard thresholding (IHT) solvers for l0-regularized convex
//! programs over extended-real boxes, and for l0-regularized convex cone
//! programs through quadratic penalties, with built-in certification of
//! (approximate) local optimality and a brute-force enumeration oracle for
//! desk-scale verification.
//!
//! The pieces:
//! - [`model`]: smooth objectives (least squares, quadratic, Tikhonov
//!   perturbation) with verified Lipschitz/strong-convexity constants,
//!   extended boxes, problem assemblies.
//! - [`geometry`]: box/cone projections and the projected-gradient map.
//! - [`pg`]: the fixed-step projected gradient method with stationarity
//!   certificates and the strongly convex iteration budget.
//! - [`iht`]: the hard-thresholding step, the fixed-L method, the dynamic-L
//!   variant, the nonzero-magnitude floor delta, and the perturbation route
//!   for bounded boxes.
//! - [`cone`]: quadratic-penalty solves with fixed and dynamically grown
//!   rho, multiplier recovery, and eps-approximate local-minimizer
//!   certificates.
//! - [`oracle`]: exhaustive support enumeration, complexity-constant
//!   evaluation, multiplier bound t-hat, finite-difference checks.
//! - [`instance`]: seeded reproducible instance generation.
//! - [`io`]: problem/report/certificate JSON and trace CSV formats.

// Validations use `!(x > 0.0)` so NaN inputs are rejected along with
// out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod error;
pub mod geometry;
pub mod iht;
pub mod instance;
pub mod io;
pub mod model;
pub mod oracle;
pub mod pg;

pub use cone::{
    certify_approx_local_min, choose_rho, choose_rho_nu, default_l_cert, make_penalty,
    penalty_solve_dynamic, penalty_solve_fixed, recover_multiplier, Certificate, DynamicOutcome,
    DynamicRound, DynamicSchedule, InnerSolver, PenaltyConfig, PenaltyObjective,
};
pub use error::{CoreError, Result};
pub use geometry::{
    dist_dual_cone, pg_map, project_box, project_box_restricted, project_cone, project_dual_cone,
    ConeBlock, ConeSpec,
};
pub use iht::{
    bb_initial_l, delta_lower_bound, hard_threshold_step, iht_solve, iht_solve_observed,
    iht_variant_solve, iht_variant_solve_observed, perturbation_for, solve_perturbed,
    variant_inner_cap, IHTConfig, SolveReport, SolveStatus, StepObserver, TraceRow, VariantConfig,
};
pub use instance::{gen_cone, gen_least_squares, ConeKind, InstanceSpec};
pub use model::{
    estimate_constants, estimate_opnorm, zero_set, ConeL0Problem, ExtendedBox, IndexSet,
    L0Problem, ObjectiveKind, SmoothObjective, SmoothOracle,
};
pub use oracle::{
    complexity_constants, complexity_constants_capped, enumerate_box, enumerate_box_capped,
    enumerate_cone, enumerate_cone_capped, fd_gradient_check, ComplexityConstants,
    EnumerationResult, SupportRecord, DEFAULT_N_CAP,
};
pub use pg::{
    certify_stationarity, iteration_budget, pg_solve, pg_step, PGConfig, PGOutcome, PGStatus,
    Stationarity,
};
