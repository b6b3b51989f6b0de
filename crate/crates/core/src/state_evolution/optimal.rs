//! Optimally tuned risk `min_γ e_λ(γ, σ_z)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{golden_section, grid_bracket, illinois, Minimum};

use super::panel::SignalPanel;
use super::solve::{FixedPoint, SigmaSolution};
use super::{SEProblem, SEState};

const CHI_FLOOR: f64 = 1e-6;
const GRID_POINTS: usize = 24;
const LOG_CHI_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalRisk {
    /// `δ(σ*² − σ_z²)` at the optimally tuned fixed point.
    pub e_star: f64,
    pub gamma_star: f64,
    pub se: SEState,
    /// True when the minimizing `χ` is the threshold beyond which the
    /// estimate is identically zero, i.e. the zero estimator is optimal.
    pub zero_estimator: bool,
}

/// `argmin_χ r(σ, χ)` for the normalized risk at fixed `σ`.
struct InnerMin {
    chi: f64,
    risk: f64,
    at_zero_threshold: bool,
}

/// Minimizes the normalized risk over `χ` by a log-spaced grid bracket and
/// golden-section search on `log χ`.
///
/// The search interval ends at the smallest `χ` that zeroes the prox on the
/// whole panel; beyond it the risk is constant. A minimum on the lower end
/// widens the interval tenfold up to three times.
fn minimize_over_chi(panel: &SignalPanel<'_>, inv_sigma: f64) -> Result<InnerMin> {
    let top = panel.zero_threshold(inv_sigma) * (1.0 + 1e-12);
    let f = |log_chi: f64| panel.eval(inv_sigma, log_chi.exp()).risk.mean;
    let mut floor = CHI_FLOOR.min(top / 10.0);
    for _ in 0..4 {
        let (lo, hi) = (floor.ln(), top.ln());
        match grid_bracket(f, lo, hi, GRID_POINTS) {
            Some((a, _, c)) => {
                let Minimum { x, value } = golden_section(f, a, c, LOG_CHI_TOL);
                return Ok(InnerMin {
                    chi: x.exp(),
                    risk: value,
                    at_zero_threshold: false,
                });
            }
            None => {
                let f_lo = f(lo);
                let f_hi = f(hi);
                if f_hi <= f_lo {
                    return Ok(InnerMin {
                        chi: top,
                        risk: f_hi,
                        at_zero_threshold: true,
                    });
                }
                floor /= 10.0;
            }
        }
    }
    Err(Error::Bracket(format!(
        "risk is still decreasing at chi={floor:e} (sigma={})",
        1.0 / inv_sigma
    )))
}

/// Solves `G(σ) = σ_z²/σ² + (1/δ) min_χ r(σ, χ) = 1`.
///
/// `G` is strictly decreasing; it is at least 1 at `σ = σ_z` and at most 1
/// at `σ = √(σ_z² + ‖x‖²/(δp))`. The root is refined by the Illinois method
/// on that bracket.
pub fn optimal_risk(prob: &SEProblem) -> Result<OptimalRisk> {
    prob.validate_noisy()?;
    let panel = prob.panel();
    let sz = prob.sigma_z;
    let delta = prob.delta;
    let g = |sigma: f64| -> Result<f64> {
        let inner = minimize_over_chi(&panel, 1.0 / sigma)?;
        Ok(sz * sz / (sigma * sigma) + inner.risk / delta - 1.0)
    };
    let lo = sz;
    let hi = (sz * sz + prob.signal_power() / delta).sqrt();
    let g_hi = g(hi)?;
    let sigma = if g_hi >= 0.0 || hi <= lo {
        hi
    } else {
        let g_lo = g(lo)?;
        illinois(g, lo, hi, Some(g_lo), Some(g_hi), 1e-12, 200)?
    };

    let inner = minimize_over_chi(&panel, 1.0 / sigma)?;
    let moments = panel.eval(1.0 / sigma, inner.chi);
    let gamma_star = sigma * inner.chi * (1.0 - moments.inner.mean / delta);
    let fp = FixedPoint { prob, panel };
    let solution = SigmaSolution { sigma, moments };
    let e_star = delta * (sigma * sigma - sz * sz);
    let se = SEState {
        sigma_star: sigma,
        chi_star: inner.chi,
        gamma: gamma_star,
        predicted_mse: e_star,
        mc_samples: prob.mc_samples,
        mc_std_err: fp.mse_std_err(inner.chi, &solution),
    };
    Ok(OptimalRisk {
        e_star,
        gamma_star,
        se,
        zero_estimator: inner.at_zero_threshold,
    })
}
