//! Closed-form ridge regression with penalty `γ‖x‖²`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Precomputed Gram matrix for repeated ridge solves on one design.
#[derive(Debug, Clone)]
pub(crate) struct RidgeSystem {
    /// `AᵀA` when `p ≤ n`, otherwise `AAᵀ`.
    gram: DMatrix<f64>,
    primal: bool,
}

impl RidgeSystem {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let primal = a.ncols() <= a.nrows();
        let gram = if primal { a.tr_mul(a) } else { a * a.transpose() };
        Self { gram, primal }
    }

    pub fn solve(&self, a: &DMatrix<f64>, y: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        if self.primal {
            solve_primal(&self.gram, a, y, gamma)
        } else {
            solve_dual(&self.gram, a, y, gamma)
        }
    }
}

fn shifted_cholesky(gram: &DMatrix<f64>, gamma: f64) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let mut m = gram.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += 2.0 * gamma;
    }
    m.cholesky()
        .ok_or_else(|| Error::Convergence("ridge system is not positive definite".into()))
}

/// `(AᵀA + 2γI)⁻¹Aᵀy`.
pub(crate) fn solve_primal(gram: &DMatrix<f64>, a: &DMatrix<f64>, y: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
    let chol = shifted_cholesky(gram, gamma)?;
    Ok(chol.solve(&a.tr_mul(y)))
}

/// `Aᵀ(AAᵀ + 2γI)⁻¹y`.
pub(crate) fn solve_dual(gram: &DMatrix<f64>, a: &DMatrix<f64>, y: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
    let chol = shifted_cholesky(gram, gamma)?;
    Ok(a.tr_mul(&chol.solve(y)))
}

/// `‖(AᵀA + 2γI)x − Aᵀy‖∞`.
pub(crate) fn ridge_residual(a: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>, gamma: f64) -> f64 {
    let ax = a * x;
    let mut r = a.tr_mul(&(ax - y));
    r.axpy(2.0 * gamma, x, 1.0);
    r.amax()
}
