//! SLOPE, LASSO, ridge and bridge fits on concrete instances.
//!
//! All iterative estimators share one accelerated proximal-gradient engine
//! with monotone restart; LASSO is SLOPE with unit weights and goes through
//! exactly the same code.

mod bridge;
mod cv;
mod fista;
mod instance;
mod ridge;

pub use bridge::bridge_prox_scalar;
pub use cv::{cross_validate, fold_assignment, CvPoint, CvResult};
pub use instance::{InstanceShape, LinearModelInstance};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::weights::WeightVector;

use fista::{fista, lipschitz_constant, BridgePenalty, SlopePenalty};
use ridge::{ridge_residual, RidgeSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50_000,
        }
    }
}

impl SolverOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self { tol, max_iter }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Tuning parameters a fit was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tuning {
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub x_hat: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub kkt_residual: f64,
    pub converged: bool,
    pub tuning: Tuning,
}

/// Which penalized estimator to fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorKind {
    Slope { weights: WeightVector },
    Lasso,
    /// Penalty `γ‖x‖²`.
    Ridge,
    /// Penalty `γ Σ|x_i|^q`, `q > 1`.
    Bridge { q: f64 },
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Slope { .. } => "slope",
            Self::Lasso => "lasso",
            Self::Ridge => "ridge",
            Self::Bridge { .. } => "bridge",
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        match self {
            Self::Slope { weights } => {
                check_len(p, weights.p())?;
                if weights.is_zero() {
                    return Err(Error::InvalidWeights("SLOPE weights are all zero".into()));
                }
            }
            Self::Bridge { q } => {
                if !(*q > 1.0 && q.is_finite()) {
                    return Err(Error::InvalidArgument(format!("bridge exponent must lie in (1, ∞), got {q}")));
                }
            }
            Self::Lasso | Self::Ridge => {}
        }
        Ok(())
    }
}

/// Repeated fits of one estimator on one instance, sharing the step size
/// (or Gram matrix) across penalty levels.
pub struct PathSolver<'a> {
    inst: &'a LinearModelInstance,
    y: DVector<f64>,
    kind: EstimatorKind,
    lambda: Vec<f64>,
    lipschitz: f64,
    ridge: Option<RidgeSystem>,
    opts: SolverOptions,
}

impl<'a> PathSolver<'a> {
    pub fn new(inst: &'a LinearModelInstance, kind: &EstimatorKind, opts: &SolverOptions) -> Result<Self> {
        kind.validate(inst.p())?;
        opts.validate()?;
        let lambda = match kind {
            EstimatorKind::Slope { weights } => weights.as_slice().to_vec(),
            EstimatorKind::Lasso => vec![1.0; inst.p()],
            _ => Vec::new(),
        };
        let (lipschitz, ridge) = match kind {
            EstimatorKind::Ridge => (0.0, Some(RidgeSystem::new(&inst.a))),
            _ => (lipschitz_constant(&inst.a), None),
        };
        Ok(Self {
            inst,
            y: DVector::from_column_slice(&inst.y),
            kind: kind.clone(),
            lambda,
            lipschitz,
            ridge,
            opts: *opts,
        })
    }

    pub fn kind(&self) -> &EstimatorKind {
        &self.kind
    }

    /// Fits at `gamma`, starting the iteration from `warm` when given.
    pub fn fit(&self, gamma: f64, warm: Option<&[f64]>) -> Result<FitResult> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("penalty level must be positive, got {gamma}")));
        }
        if let Some(w) = warm {
            check_len(self.inst.p(), w.len())?;
        }
        let a = &self.inst.a;
        let (tol, max_iter) = (self.opts.tol, self.opts.max_iter);
        match &self.kind {
            EstimatorKind::Slope { .. } | EstimatorKind::Lasso => {
                let mut pen = SlopePenalty::new(gamma, &self.lambda);
                let out = fista(a, &self.y, &mut pen, self.lipschitz, warm, tol, max_iter);
                if !out.converged {
                    log::debug!("{} fit at gamma={gamma} stopped with kkt={:.3e}", self.kind.name(), out.kkt);
                }
                Ok(FitResult {
                    x_hat: out.x,
                    iterations: out.iterations,
                    objective: out.objective,
                    kkt_residual: out.kkt,
                    converged: out.converged,
                    tuning: Tuning { gamma, q: None },
                })
            }
            EstimatorKind::Bridge { q } => {
                let mut pen = BridgePenalty {
                    gamma,
                    q: *q,
                    scale: self.inst.gradient_scale().max(1.0),
                    failures: 0,
                };
                let out = fista(a, &self.y, &mut pen, self.lipschitz, warm, tol, max_iter);
                if pen.failures > 0 {
                    log::warn!("bridge scalar prox hit its iteration cap {} times", pen.failures);
                }
                Ok(FitResult {
                    x_hat: out.x,
                    iterations: out.iterations,
                    objective: out.objective,
                    kkt_residual: out.kkt,
                    converged: out.converged && pen.failures == 0,
                    tuning: Tuning { gamma, q: Some(*q) },
                })
            }
            EstimatorKind::Ridge => {
                let system = self.ridge.as_ref().expect("ridge system is built with the solver");
                let x = system.solve(a, &self.y, gamma)?;
                let kkt = ridge_residual(a, &self.y, &x, gamma);
                let r = a * &x - &self.y;
                let objective = 0.5 * r.norm_squared() + gamma * x.norm_squared();
                Ok(FitResult {
                    x_hat: x.data.into(),
                    iterations: 1,
                    objective,
                    kkt_residual: kkt,
                    converged: true,
                    tuning: Tuning { gamma, q: Some(2.0) },
                })
            }
        }
    }
}

/// `argmin ½‖y − Ax‖² + γ‖x‖_λ`.
pub fn fit_slope(inst: &LinearModelInstance, gamma: f64, lambda: &WeightVector, opts: &SolverOptions) -> Result<FitResult> {
    PathSolver::new(inst, &EstimatorKind::Slope { weights: lambda.clone() }, opts)?.fit(gamma, None)
}

/// SLOPE with unit weights.
pub fn fit_lasso(inst: &LinearModelInstance, gamma: f64, opts: &SolverOptions) -> Result<FitResult> {
    fit_slope(inst, gamma, &WeightVector::constant(inst.p()), opts)
}

/// `argmin ½‖y − Ax‖² + γ‖x‖²` in closed form.
pub fn fit_ridge(inst: &LinearModelInstance, gamma: f64) -> Result<FitResult> {
    PathSolver::new(inst, &EstimatorKind::Ridge, &SolverOptions::default())?.fit(gamma, None)
}

/// `argmin ½‖y − Ax‖² + γ Σ|x_i|^q` for `q > 1`.
pub fn fit_bridge(inst: &LinearModelInstance, gamma: f64, q: f64, opts: &SolverOptions) -> Result<FitResult> {
    PathSolver::new(inst, &EstimatorKind::Bridge { q }, opts)?.fit(gamma, None)
}

/// Fits `kind` at `gamma`.
pub fn fit(inst: &LinearModelInstance, kind: &EstimatorKind, gamma: f64, opts: &SolverOptions) -> Result<FitResult> {
    PathSolver::new(inst, kind, opts)?.fit(gamma, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sorted_l1::prox_sorted_l1;
    use nalgebra::DMatrix;

    fn identity_instance(y: &[f64]) -> LinearModelInstance {
        LinearModelInstance::new(DMatrix::identity(y.len(), y.len()), y.to_vec()).unwrap()
    }

    #[test]
    fn identity_design_gives_prox() {
        let y = [3.0, -1.0, 0.5, 2.5, -2.6];
        let lam = WeightVector::new(vec![1.0, 0.8, 0.5, 0.3, 0.1]).unwrap();
        let inst = identity_instance(&y);
        let fit = fit_slope(&inst, 1.2, &lam, &SolverOptions::default()).unwrap();
        let prox = prox_sorted_l1(&y, 1.2, &lam).unwrap();
        assert!(fit.converged);
        for (a, b) in fit.x_hat.iter().zip(&prox.eta) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn small_gamma_recovers_response() {
        let y = [1.0, -2.0, 0.3];
        let fit = fit_lasso(&identity_instance(&y), 1e-10, &SolverOptions::default()).unwrap();
        for (a, b) in fit.x_hat.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn ridge_identity() {
        let y = [1.0, -2.0, 0.3];
        let fit = fit_ridge(&identity_instance(&y), 0.5).unwrap();
        for (a, b) in fit.x_hat.iter().zip(&y) {
            assert!((a - b / 2.0).abs() < 1e-14);
        }
        assert!(fit_ridge(&identity_instance(&y), 0.0).is_err());
    }

    #[test]
    fn bridge_rejects_bad_q() {
        let inst = identity_instance(&[1.0, 2.0]);
        let opts = SolverOptions::default();
        assert!(fit_bridge(&inst, 1.0, 1.0, &opts).is_err());
        assert!(fit_bridge(&inst, 1.0, f64::INFINITY, &opts).is_err());
    }

    #[test]
    fn estimator_kind_json() {
        let k: EstimatorKind = serde_json::from_str(r#"{"kind":"bridge","q":1.5}"#).unwrap();
        assert_eq!(k, EstimatorKind::Bridge { q: 1.5 });
        let k: EstimatorKind = serde_json::from_str(r#"{"kind":"slope","weights":[1.0,0.5]}"#).unwrap();
        assert!(matches!(k, EstimatorKind::Slope { .. }));
        assert!(serde_json::from_str::<EstimatorKind>(r#"{"kind":"slope","weights":[0.5,1.0]}"#).is_err());
    }
}
