//! Sorted-L1 penalized (SLOPE) regression toolkit.
//!
//! - [`sorted_l1`]: the sorted-L1 norm, its dual, and its proximal operator.
//! - [`solvers`]: SLOPE, LASSO, Ridge and bridge fits with cross-validation.
//! - [`state_evolution`]: Monte Carlo state evolution, phase-transition
//!   threshold and noise sensitivity.
//! - [`datagen`]: seeded synthetic designs, signals and weight sequences.
//! - [`experiments`]: replicated comparisons with CSV/SVG output.

pub mod datagen;
pub mod error;
pub mod experiments;
pub mod io;
pub mod numeric;
pub mod rng;
pub mod solvers;
pub mod sorted_l1;
pub mod special;
pub mod state_evolution;
pub mod weights;

pub use datagen::{
    gen_design, gen_noise, gen_signal, gen_weights, DesignKind, DesignSpec, SignalKind, SignalSpec,
    WeightKind, WeightSpec,
};
pub use error::{Error, Result};
pub use experiments::{ExperimentSpec, ResultRow, ResultTable};
pub use solvers::{
    cross_validate, fit_bridge, fit_lasso, fit_ridge, fit_slope, CvResult, EstimatorKind, FitResult,
    LinearModelInstance, SolverOptions,
};
pub use sorted_l1::{
    dual_sorted_l1_norm, isotonic_regression_nonincreasing, project_dual_ball, prox_gamma_derivative,
    prox_sorted_l1, sorted_l1_norm, ProxResult, ProxWorkspace, TieGroup,
};
pub use state_evolution::{
    bridge_large_noise_asymptote, m_lambda, m_lambda_at_chi, mc_risk, noise_sensitivity, optimal_risk,
    solve_se, OptimalRisk, PhaseEstimate, SEProblem, SEState,
};
pub use weights::WeightVector;
