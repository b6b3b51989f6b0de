//! Fixed-penalty state evolution: find `(σ*, χ*)` for a given `γ`.

use crate::error::{Error, Result};
use crate::numeric::illinois;

use super::panel::{NormalizedRisk, SignalPanel};
use super::{SEProblem, SEState};

const CHI_MIN: f64 = 1e-6;
const CHI_MAX: f64 = 1e4;
const SIGMA_ITER: usize = 200;
const SIGMA_TOL: f64 = 1e-13;

/// The `σ` solving the first equation at fixed `χ`, with its moments.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SigmaSolution {
    pub sigma: f64,
    pub moments: NormalizedRisk,
}

pub(crate) struct FixedPoint<'a> {
    pub prob: &'a SEProblem,
    pub panel: SignalPanel<'a>,
}

impl<'a> FixedPoint<'a> {
    pub fn new(prob: &'a SEProblem) -> Self {
        Self {
            prob,
            panel: prob.panel(),
        }
    }

    fn residual(&self, sigma: f64, chi: f64) -> (f64, NormalizedRisk) {
        let m = self.panel.eval(1.0 / sigma, chi);
        let sz = self.prob.sigma_z;
        (sz * sz / (sigma * sigma) + m.risk.mean / self.prob.delta - 1.0, m)
    }

    /// Solves `σ² = σ_z² + (σ²/δ) r(σ, χ)`, or `None` when no finite root
    /// exists because the pure-noise risk already reaches `δ`.
    ///
    /// The residual `σ_z²/σ² + r(σ, χ)/δ − 1` is decreasing in `σ`, is
    /// nonnegative at `σ = σ_z`, and tends to `r(∞, χ)/δ − 1`.
    pub fn sigma_for_chi(&self, chi: f64) -> Result<Option<SigmaSolution>> {
        let limit = self.panel.eval(0.0, chi).risk.mean;
        if limit >= self.prob.delta {
            return Ok(None);
        }
        let lo = self.prob.sigma_z;
        let (f_lo, m_lo) = self.residual(lo, chi);
        if f_lo <= 0.0 {
            return Ok(Some(SigmaSolution { sigma: lo, moments: m_lo }));
        }
        let mut hi = 2.0 * lo;
        let mut f_hi = self.residual(hi, chi).0;
        let mut doublings = 0;
        while f_hi > 0.0 {
            doublings += 1;
            if doublings > SIGMA_ITER {
                return Err(Error::Convergence(format!(
                    "no upper bracket for sigma at chi={chi} (pure-noise risk {limit:.6} vs delta {})",
                    self.prob.delta
                )));
            }
            hi *= 2.0;
            f_hi = self.residual(hi, chi).0;
        }
        let lo = hi / 2.0;
        let f_lo = self.residual(lo, chi).0;
        let sigma = illinois(|s| Ok(self.residual(s, chi).0), lo, hi, Some(f_lo), Some(f_hi), SIGMA_TOL, SIGMA_ITER)
            .map_err(|e| Error::Convergence(format!("sigma equation at chi={chi}: {e}")))?;
        let moments = self.panel.eval(1.0 / sigma, chi);
        Ok(Some(SigmaSolution { sigma, moments }))
    }

    /// `γ(χ) = σχ(1 − i/δ)` with `i` the normalized inner moment.
    pub fn implied_gamma(&self, chi: f64, s: &SigmaSolution) -> f64 {
        s.sigma * chi * (1.0 - s.moments.inner.mean / self.prob.delta)
    }

    /// Standard error of `δ(σ² − σ_z²)` propagated from the risk moment at
    /// fixed `χ` through the `σ` equation.
    pub fn mse_std_err(&self, chi: f64, s: &SigmaSolution) -> f64 {
        let sigma = s.sigma;
        let sz = self.prob.sigma_z;
        let h = 1e-4 * sigma;
        let r_plus = self.panel.eval(1.0 / (sigma + h), chi).risk.mean;
        let r_minus = self.panel.eval(1.0 / (sigma - h), chi).risk.mean;
        let dr = (r_plus - r_minus) / (2.0 * h);
        let dres = -2.0 * sz * sz / sigma.powi(3) + dr.min(0.0) / self.prob.delta;
        2.0 * sigma * s.moments.risk.std_err / dres.abs()
    }
}

/// Solves the state-evolution equations at penalty `gamma`.
///
/// For each trial `χ` the first equation is solved for `σ`; the outer
/// search brackets the calibration residual `γ(χ) − γ` by doubling or
/// halving `χ` from 1 within `[1e−6, 1e4]` and refines the bracket. Values
/// of `χ` for which the first equation has no finite root are treated as
/// lying below the target.
pub fn solve_se(prob: &SEProblem, gamma: f64) -> Result<SEState> {
    prob.validate_noisy()?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("penalty level must be positive, got {gamma}")));
    }
    let fp = FixedPoint::new(prob);

    // Some(residual) for feasible χ, None otherwise
    let eval = |chi: f64| -> Result<(Option<f64>, Option<SigmaSolution>)> {
        Ok(match fp.sigma_for_chi(chi)? {
            Some(s) => (Some(fp.implied_gamma(chi, &s) - gamma), Some(s)),
            None => (None, None),
        })
    };
    let above = |r: Option<f64>| matches!(r, Some(v) if v > 0.0);

    let mut trail: Vec<(f64, Option<f64>)> = Vec::new();
    let mut chi = 1.0;
    let (r0, _) = eval(chi)?;
    trail.push((chi, r0));
    let (mut lo, mut r_lo, mut hi, mut r_hi);
    if above(r0) {
        hi = chi;
        r_hi = r0.unwrap();
        loop {
            chi /= 2.0;
            if chi < CHI_MIN {
                return Err(bracket_error(gamma, &trail));
            }
            let (r, _) = eval(chi)?;
            trail.push((chi, r));
            if !above(r) {
                lo = chi;
                r_lo = r;
                break;
            }
            hi = chi;
            r_hi = r.unwrap();
        }
    } else {
        lo = chi;
        r_lo = r0;
        loop {
            chi *= 2.0;
            if chi > CHI_MAX {
                return Err(bracket_error(gamma, &trail));
            }
            let (r, _) = eval(chi)?;
            trail.push((chi, r));
            if above(r) {
                hi = chi;
                r_hi = r.unwrap();
                break;
            }
            lo = chi;
            r_lo = r;
        }
    }

    // move the lower end into the feasible region by geometric bisection
    let mut steps = 0;
    while r_lo.is_none() {
        steps += 1;
        if steps > 200 {
            return Err(bracket_error(gamma, &trail));
        }
        let mid = (lo * hi).sqrt();
        let (r, _) = eval(mid)?;
        trail.push((mid, r));
        if above(r) {
            hi = mid;
            r_hi = r.unwrap();
        } else {
            lo = mid;
            r_lo = r;
        }
        if (hi - lo) <= 1e-12 * hi {
            break;
        }
    }
    let chi_star = match r_lo {
        Some(f_lo) => illinois(
            |c| Ok(eval(c)?.0.unwrap_or(f64::NEG_INFINITY)),
            lo,
            hi,
            Some(f_lo),
            Some(r_hi),
            1e-10,
            200,
        )?,
        None => hi,
    };
    let s = fp
        .sigma_for_chi(chi_star)?
        .ok_or_else(|| bracket_error(gamma, &trail))?;
    let sz = prob.sigma_z;
    Ok(SEState {
        sigma_star: s.sigma,
        chi_star,
        gamma: fp.implied_gamma(chi_star, &s),
        predicted_mse: prob.delta * (s.sigma * s.sigma - sz * sz),
        mc_samples: prob.mc_samples,
        mc_std_err: fp.mse_std_err(chi_star, &s),
    })
}

fn bracket_error(gamma: f64, trail: &[(f64, Option<f64>)]) -> Error {
    let shown: Vec<String> = trail
        .iter()
        .map(|(c, r)| match r {
            Some(v) => format!("chi={c:.3e}: {v:+.3e}"),
            None => format!("chi={c:.3e}: infeasible"),
        })
        .collect();
    Error::Bracket(format!(
        "calibration residual for gamma={gamma} has no sign change in [{CHI_MIN:e}, {CHI_MAX:e}]; tried {}",
        shown.join(", ")
    ))
}
