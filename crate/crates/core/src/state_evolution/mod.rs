//! Monte Carlo state evolution for SLOPE.
//!
//! For a signal `x`, weights `λ`, sampling ratio `δ` and noise level `σ_z`,
//! the fixed point `(σ, χ)` of
//!
//! ```text
//! σ² = σ_z² + (1/δp) E‖η(x + σh; σχ) − x‖²
//! γ  = σχ (1 − (1/δσp) E⟨η(x + σh; σχ), h⟩)
//! ```
//!
//! predicts the mean square error `δ(σ² − σ_z²)` of the SLOPE fit at
//! penalty `γ`. Expectations over `h ~ N(0, I_p)` are Monte Carlo averages
//! over one frozen Gaussian panel per solve, so every residual seen by the
//! root finders is a deterministic, smooth function of its arguments.
//!
//! Internally everything is expressed through the normalized moments at
//! `x/σ`, using `η(x + σh; σχ) = σ η(x/σ + h; χ)`.

mod optimal;
mod panel;
mod phase;
mod solve;

pub use optimal::{optimal_risk, OptimalRisk};
pub use phase::{
    bridge_large_noise_asymptote, m_lambda, m_lambda_at_chi, noise_sensitivity, LargeNoiseAsymptote, NoiseSensitivity,
    PhaseEstimate,
};
pub use solve::solve_se;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::weights::WeightVector;

use panel::SignalPanel;

fn default_mc_samples() -> usize {
    2000
}

/// Inputs of a state-evolution solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SEProblem {
    pub x: Vec<f64>,
    pub lambda: WeightVector,
    pub delta: f64,
    pub sigma_z: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

impl SEProblem {
    pub fn new(x: Vec<f64>, lambda: WeightVector, delta: f64, sigma_z: f64) -> Self {
        Self {
            x,
            lambda,
            delta,
            sigma_z,
            seed: 0,
            mc_samples: default_mc_samples(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mc_samples(mut self, mc_samples: usize) -> Self {
        self.mc_samples = mc_samples;
        self
    }

    pub fn p(&self) -> usize {
        self.x.len()
    }

    /// `‖x‖²/p`, the risk of the zero estimator.
    pub fn signal_power(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>() / self.p() as f64
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.x.is_empty() {
            return Err(Error::InvalidArgument("empty signal".into()));
        }
        check_len(self.lambda.p(), self.x.len())?;
        check_finite("signal", &self.x)?;
        if self.lambda.is_zero() {
            return Err(Error::InvalidWeights("weights are all zero".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.sigma_z >= 0.0 && self.sigma_z.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise level must be nonnegative, got {}",
                self.sigma_z
            )));
        }
        if self.mc_samples < 2 {
            return Err(Error::InvalidArgument("need at least 2 Monte Carlo samples".into()));
        }
        Ok(())
    }

    /// Solves that condition on `σ_z > 0`.
    pub(crate) fn validate_noisy(&self) -> Result<()> {
        self.validate()?;
        if self.sigma_z <= 0.0 {
            return Err(Error::InvalidArgument(
                "state evolution needs sigma_z > 0; probe the noiseless limit at a small positive level".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn panel(&self) -> SignalPanel<'_> {
        SignalPanel::new(&self.x, self.lambda.as_slice(), self.mc_samples, self.seed)
    }
}

/// A solved state-evolution pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SEState {
    pub sigma_star: f64,
    pub chi_star: f64,
    pub gamma: f64,
    /// `δ(σ*² − σ_z²)`.
    pub predicted_mse: f64,
    pub mc_samples: usize,
    /// Monte Carlo standard error of `predicted_mse`.
    pub mc_std_err: f64,
}

/// Monte Carlo moments at `(σ, χ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    /// `(1/p)E‖η(x + σh; σχ) − x‖²`.
    pub risk: f64,
    /// `(1/p)E⟨η(x + σh; σχ), h⟩`.
    pub inner: f64,
    pub risk_std_err: f64,
    pub inner_std_err: f64,
}

/// Monte Carlo estimate of the state-evolution moments at `(σ, χ)`.
pub fn mc_risk(prob: &SEProblem, sigma: f64, chi: f64) -> Result<RiskEstimate> {
    prob.validate()?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if !(chi >= 0.0 && chi.is_finite()) {
        return Err(Error::InvalidArgument(format!("chi must be nonnegative, got {chi}")));
    }
    let m = prob.panel().eval(1.0 / sigma, chi);
    Ok(RiskEstimate {
        risk: sigma * sigma * m.risk.mean,
        inner: sigma * m.inner.mean,
        risk_std_err: sigma * sigma * m.risk.std_err,
        inner_std_err: sigma * m.inner.std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::soft_threshold_second_moment;

    #[test]
    fn zero_chi_is_identity() {
        let prob = SEProblem::new(vec![5.0, 0.0, 0.0, 2.0], WeightVector::constant(4), 1.0, 1.0).with_mc_samples(4000);
        let r = mc_risk(&prob, 2.0, 0.0).unwrap();
        assert!((r.risk - 4.0).abs() < 3.0 * r.risk_std_err);
    }

    #[test]
    fn huge_chi_kills_estimate() {
        let x = vec![5.0, -1.0, 0.0, 2.0, 0.0];
        let prob = SEProblem::new(x, WeightVector::new(vec![1.0, 0.8, 0.6, 0.4, 0.2]).unwrap(), 1.0, 1.0);
        let r = mc_risk(&prob, 1.5, 1e6).unwrap();
        assert!((r.risk - prob.signal_power()).abs() < 1e-12);
    }

    #[test]
    fn soft_threshold_closed_form() {
        let prob = SEProblem::new(vec![0.0; 50], WeightVector::constant(50), 1.0, 1.0).with_mc_samples(2000);
        for chi in [0.3, 1.0, 2.0] {
            let r = mc_risk(&prob, 1.7, chi).unwrap();
            let exact = 1.7f64.powi(2) * soft_threshold_second_moment(chi);
            assert!((r.risk - exact).abs() < 3.0 * r.risk_std_err, "chi={chi}: {} vs {exact}", r.risk);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let prob = SEProblem::new(vec![1.0, 0.0], WeightVector::constant(2), 1.0, 1.0);
        assert!(mc_risk(&prob, 0.0, 1.0).is_err());
        assert!(mc_risk(&prob, 1.0, -1.0).is_err());
        let bad = SEProblem::new(vec![1.0], WeightVector::constant(2), 1.0, 1.0);
        assert!(mc_risk(&bad, 1.0, 1.0).is_err());
    }
}
