//! Noiseless phase-transition threshold and noise sensitivity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::golden_section;
use crate::weights::WeightVector;

use super::panel::{noise_prox_energy, Moment, Panel};

const ALPHA_MIN: f64 = 1e-4;
const ALPHA_MAX: f64 = 1e3;

/// A Monte Carlo estimate of `M_λ` (or of `M_λ(χ)` at a fixed `χ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseEstimate {
    pub value: f64,
    pub std_err: f64,
    /// The minimizing (or fixed) threshold `α`.
    pub alpha: f64,
    pub k: usize,
    pub p: usize,
    pub mc_samples: usize,
}

/// `(1/p)[k + α² Σ_{i≤k} λ_i² + E‖η(h̃; α, λ_{k+1..p})‖²]` on a frozen
/// panel `h̃ ∈ R^{p−k}`.
struct ThresholdObjective<'a> {
    k: usize,
    p: usize,
    head_sq: f64,
    tail: &'a [f64],
    panel: Panel,
}

impl<'a> ThresholdObjective<'a> {
    fn new(k: usize, lambda: &'a WeightVector, mc_samples: usize, seed: u64) -> Result<Self> {
        let p = lambda.p();
        if k == 0 || k >= p {
            return Err(Error::InvalidArgument(format!("need 0 < k < p, got k={k}, p={p}")));
        }
        if mc_samples < 2 {
            return Err(Error::InvalidArgument("need at least 2 Monte Carlo samples".into()));
        }
        if lambda.is_zero() {
            return Err(Error::InvalidWeights("weights are all zero".into()));
        }
        let w = lambda.as_slice();
        Ok(Self {
            k,
            p,
            head_sq: w[..k].iter().map(|v| v * v).sum(),
            tail: &w[k..],
            panel: Panel::new(mc_samples, p - k, seed),
        })
    }

    fn eval(&self, alpha: f64) -> Moment {
        let pf = self.p as f64;
        let base = (self.k as f64 + alpha * alpha * self.head_sq) / pf;
        let energy = noise_prox_energy(&self.panel, self.tail, alpha);
        let m = Moment::from_samples(energy.iter().map(|e| e / pf));
        Moment {
            mean: base + m.mean,
            std_err: m.std_err,
        }
    }

    fn estimate(&self, alpha: f64) -> PhaseEstimate {
        let m = self.eval(alpha);
        PhaseEstimate {
            value: m.mean,
            std_err: m.std_err,
            alpha,
            k: self.k,
            p: self.p,
            mc_samples: self.panel.samples(),
        }
    }
}

/// `M_λ = (1/p) inf_α {k + α² Σ_{i≤k} λ_i² + E‖η(h̃; α, λ_{k+1..p})‖²}`.
///
/// The objective is strictly convex in `α`; it is minimized by
/// golden-section search on `log α ∈ [log 1e−4, log 1e3]` with common
/// random numbers across `α`.
pub fn m_lambda(k: usize, lambda: &WeightVector, mc_samples: usize, seed: u64) -> Result<PhaseEstimate> {
    let obj = ThresholdObjective::new(k, lambda, mc_samples, seed)?;
    let best = golden_section(|t| obj.eval(t.exp()).mean, ALPHA_MIN.ln(), ALPHA_MAX.ln(), 1e-7);
    Ok(obj.estimate(best.x.exp()))
}

/// The fixed-threshold version `M_λ(χ)`: the same objective at `α = χ`.
pub fn m_lambda_at_chi(k: usize, lambda: &WeightVector, chi: f64, mc_samples: usize, seed: u64) -> Result<PhaseEstimate> {
    if !(chi >= 0.0 && chi.is_finite()) {
        return Err(Error::InvalidArgument(format!("chi must be nonnegative, got {chi}")));
    }
    Ok(ThresholdObjective::new(k, lambda, mc_samples, seed)?.estimate(chi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSensitivity {
    /// `δM/(δ − M)` above the transition, `+∞` otherwise.
    pub value: f64,
    /// Set when `δ = M` exactly, where the constant is undefined.
    pub at_boundary: bool,
}

/// Limit of the optimally tuned `MSE/σ_z²` as `σ_z → 0`.
pub fn noise_sensitivity(delta: f64, m_lambda_value: f64) -> Result<NoiseSensitivity> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if !(m_lambda_value > 0.0 && m_lambda_value.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {m_lambda_value}"
        )));
    }
    Ok(if delta > m_lambda_value {
        NoiseSensitivity {
            value: delta * m_lambda_value / (delta - m_lambda_value),
            at_boundary: false,
        }
    } else {
        NoiseSensitivity {
            value: f64::INFINITY,
            at_boundary: delta == m_lambda_value,
        }
    })
}

/// Leading large-noise behaviour of the optimally tuned bridge estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeNoiseAsymptote {
    /// `‖x‖²/p`.
    pub leading: f64,
    /// Sign of the `σ_z⁻²` correction: the risk approaches the leading term
    /// from below.
    pub second_order_sign: i8,
    pub sigma_z: f64,
}

/// Leading term of the optimally tuned bridge risk as `σ_z → ∞`. The
/// second-order constant is not known in closed form, so only its sign is
/// reported.
pub fn bridge_large_noise_asymptote(q: f64, x_norm2_sq_over_p: f64, sigma_z: f64) -> Result<LargeNoiseAsymptote> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("bridge exponent must lie in (1, ∞), got {q}")));
    }
    if !(x_norm2_sq_over_p >= 0.0 && x_norm2_sq_over_p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "signal power must be nonnegative, got {x_norm2_sq_over_p}"
        )));
    }
    if sigma_z.is_nan() || sigma_z <= 0.0 {
        return Err(Error::InvalidArgument(format!("noise level must be positive, got {sigma_z}")));
    }
    Ok(LargeNoiseAsymptote {
        leading: x_norm2_sq_over_p,
        second_order_sign: -1,
        sigma_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensitivity_algebra() {
        let s = noise_sensitivity(0.8, 0.4).unwrap();
        assert!((s.value - 0.8).abs() < 1e-15);
        assert_eq!(noise_sensitivity(0.3, 0.4).unwrap().value, f64::INFINITY);
        let b = noise_sensitivity(0.4, 0.4).unwrap();
        assert!(b.at_boundary && b.value.is_infinite());
        assert!(noise_sensitivity(1.0, 0.0).is_err());
    }

    #[test]
    fn asymptote_domain() {
        let a = bridge_large_noise_asymptote(1.5, 2.5, 10.0).unwrap();
        assert_eq!(a.leading, 2.5);
        assert_eq!(a.second_order_sign, -1);
        assert!(bridge_large_noise_asymptote(1.0, 2.5, 10.0).is_err());
        assert!(bridge_large_noise_asymptote(f64::INFINITY, 2.5, 10.0).is_err());
    }

    #[test]
    fn objective_lower_bound() {
        let lam = WeightVector::new((0..50).map(|i| 1.0 - i as f64 / 60.0).collect()).unwrap();
        let k = 10;
        let head: f64 = lam.as_slice()[..k].iter().map(|v| v * v).sum();
        for alpha in [0.01, 0.5, 2.0, 10.0] {
            let e = m_lambda_at_chi(k, &lam, alpha, 50, 1).unwrap();
            assert!(e.value >= (k as f64 + alpha * alpha * head) / 50.0);
        }
        let m = m_lambda(k, &lam, 200, 1).unwrap();
        assert!(m.value <= m_lambda_at_chi(k, &lam, 1.0, 200, 1).unwrap().value);
        assert!(m_lambda(0, &lam, 10, 1).is_err());
        assert!(m_lambda(50, &lam, 10, 1).is_err());
    }
}
