//! Replicated synthetic comparisons.
//!
//! An [`ExperimentSpec`] (JSON) fixes the design, signal, estimators and
//! grid; [`run_experiment`] turns it into a [`ResultTable`] of mean MSE
//! `(1/p)‖x̂ − x‖²` with standard errors. Replication `r` uses the seed
//! `derive_seed(base_seed, r)` on penalty grids and
//! `derive_seed(derive_seed(base_seed, g), r)` at noise level `g` on noise
//! sweeps, so the table depends on nothing but the spec.

mod checks;
mod output;
mod runner;
mod spec;

use serde::{Deserialize, Serialize};

pub use checks::{evaluate_assertions, AssertionOutcome};
pub use output::{emit_csv, emit_svg, manifest_json, parse_csv, to_csv, to_svg, CSV_HEADER};
pub use runner::{cv_grid, run_experiment, run_figure1, run_noise_sweep, NOISELESS_SE_SIGMA};
pub use spec::{
    Assertion, EstimatorName, EstimatorSpec, ExperimentKind, ExperimentSpec, OutputPaths, TuningMode,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub estimator: String,
    pub x: f64,
    pub mean: f64,
    /// Sample standard deviation over `√m`; for state-evolution rows the
    /// Monte Carlo standard error.
    pub stderr: f64,
    /// Replications kept, or Monte Carlo samples for state-evolution rows.
    pub m: usize,
}

impl ResultRow {
    /// Equality that treats NaN fields as equal.
    pub fn same_as(&self, other: &Self) -> bool {
        self.estimator == other.estimator
            && self.x.to_bits() == other.x.to_bits()
            && self.mean.to_bits() == other.mean.to_bits()
            && self.stderr.to_bits() == other.stderr.to_bits()
            && self.m == other.m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_hash: String,
    pub base_seed: u64,
    pub version: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub name: String,
    pub rows: Vec<ResultRow>,
    pub provenance: Provenance,
}

impl ResultTable {
    pub fn row(&self, estimator: &str, x: f64) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.x == x)
    }

    pub fn series(&self, estimator: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.estimator == estimator).collect()
    }

    /// Estimator labels in first-appearance order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.estimator.as_str()) {
                out.push(&r.estimator);
            }
        }
        out
    }
}
