//! The sorted-L1 norm `‖x‖_λ = Σ λ_i |x|_(i)`, its dual norm, and its
//! proximal operator.
//!
//! The prox is computed by sorting `|u|` in decreasing order, fitting a
//! nonincreasing isotonic regression to `|u|_(i) − γλ_i`, clipping at zero,
//! and restoring signs and the original order. The pooled PAVA blocks are
//! exactly the tie groups of the result, so no floating-point comparison is
//! needed to recover the partition.

mod pava;

pub use pava::isotonic_regression_nonincreasing;

use pava::{pava_blocks, Block};
use serde::Serialize;

use crate::error::{check_finite, check_len, Error, Result};
use crate::weights::WeightVector;

/// `Σ_i λ_i |v|_(i)` with `|v|_(1) ≥ |v|_(2) ≥ …`.
pub fn sorted_l1_norm(v: &[f64], lambda: &WeightVector) -> Result<f64> {
    check_len(lambda.p(), v.len())?;
    Ok(sorted_l1_norm_unchecked(v, lambda.as_slice()))
}

pub(crate) fn sorted_l1_norm_unchecked(v: &[f64], lambda: &[f64]) -> f64 {
    let mut abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    abs.sort_unstable_by(|a, b| b.total_cmp(a));
    abs.iter().zip(lambda).map(|(a, l)| a * l).sum()
}

/// Dual norm `max_j (Σ_{i≤j} |v|_(i)) / (Σ_{i≤j} λ_i)`.
///
/// A prefix whose weight sum is zero constrains the matching prefix of
/// `|v|` to be zero; if it is not, the result is `+∞`.
pub fn dual_sorted_l1_norm(v: &[f64], lambda: &WeightVector) -> Result<f64> {
    check_len(lambda.p(), v.len())?;
    Ok(dual_sorted_l1_norm_unchecked(v, lambda.as_slice()))
}

pub(crate) fn dual_sorted_l1_norm_unchecked(v: &[f64], lambda: &[f64]) -> f64 {
    let mut abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    abs.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut num = 0.0;
    let mut den = 0.0;
    let mut best: f64 = 0.0;
    for (a, l) in abs.iter().zip(lambda) {
        num += a;
        den += l;
        if den > 0.0 {
            best = best.max(num / den);
        } else if num > 0.0 {
            return f64::INFINITY;
        }
    }
    best
}

/// A run of positions `[start, end)` in the decreasing-|u| order whose
/// prox magnitudes are all equal to `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TieGroup {
    pub start: usize,
    pub end: usize,
    pub value: f64,
}

impl TieGroup {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn is_active(&self) -> bool {
        self.value > 0.0
    }
}

/// Output of [`prox_sorted_l1`]: the prox value and its tie partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProxResult {
    pub eta: Vec<f64>,
    /// Groups in decreasing order of `|η|`; the zero group, if any, is last.
    pub groups: Vec<TieGroup>,
    /// `permutation[r]` is the original index holding the `r`-th largest `|u|`.
    pub permutation: Vec<usize>,
}

impl ProxResult {
    /// Original indices belonging to `group`.
    pub fn members(&self, group: &TieGroup) -> &[usize] {
        &self.permutation[group.start..group.end]
    }

    pub fn active_groups(&self) -> impl Iterator<Item = &TieGroup> {
        self.groups.iter().filter(|g| g.is_active())
    }

    /// The partition as lists of original indices.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        self.groups.iter().map(|g| self.members(g).to_vec()).collect()
    }
}

/// Reusable buffers for repeated prox evaluations of the same dimension.
#[derive(Debug, Default, Clone)]
pub struct ProxWorkspace {
    order: Vec<usize>,
    blocks: Vec<Block>,
}

impl ProxWorkspace {
    pub fn new(p: usize) -> Self {
        Self {
            order: Vec::with_capacity(p),
            blocks: Vec::with_capacity(p),
        }
    }

    /// Writes `η(u; γ, λ)` into `out`. Inputs are assumed validated.
    pub fn prox_into(&mut self, u: &[f64], gamma: f64, lambda: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), lambda.len());
        debug_assert_eq!(u.len(), out.len());
        self.sort(u);
        let order = &self.order;
        pava_blocks(u.len(), |r| u[order[r]].abs() - gamma * lambda[r], &mut self.blocks);
        for b in &self.blocks {
            let v = b.mean().max(0.0);
            for &i in &order[b.start..b.end()] {
                out[i] = if v > 0.0 { v.copysign(u[i]) } else { 0.0 };
            }
        }
    }

    fn sort(&mut self, u: &[f64]) {
        self.order.clear();
        self.order.extend(0..u.len());
        // ties in |u| broken by original index
        self.order
            .sort_unstable_by(|&i, &j| u[j].abs().total_cmp(&u[i].abs()).then(i.cmp(&j)));
    }

    fn groups(&self) -> Vec<TieGroup> {
        let mut groups = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let v = b.mean();
            if v > 0.0 {
                groups.push(TieGroup {
                    start: b.start,
                    end: b.end(),
                    value: v,
                });
            } else {
                // every remaining block is clipped to zero: one group
                groups.push(TieGroup {
                    start: b.start,
                    end: self.order.len(),
                    value: 0.0,
                });
                break;
            }
        }
        groups
    }
}

fn validate(u: &[f64], gamma: f64, lambda: &WeightVector) -> Result<()> {
    check_len(lambda.p(), u.len())?;
    check_finite("prox input", u)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "penalty level must be finite and nonnegative, got {gamma}"
        )));
    }
    Ok(())
}

/// The unique minimizer of `½‖u − x‖² + γ‖x‖_λ`, with its tie partition.
pub fn prox_sorted_l1(u: &[f64], gamma: f64, lambda: &WeightVector) -> Result<ProxResult> {
    validate(u, gamma, lambda)?;
    let mut ws = ProxWorkspace::new(u.len());
    let mut eta = vec![0.0; u.len()];
    ws.prox_into(u, gamma, lambda.as_slice(), &mut eta);
    let groups = ws.groups();
    Ok(ProxResult {
        eta,
        groups,
        permutation: ws.order,
    })
}

/// Euclidean projection of `u` onto the dual ball `{v : ‖v‖_λ* ≤ γ}`,
/// computed as `u − η(u; γ)`.
pub fn project_dual_ball(u: &[f64], gamma: f64, lambda: &WeightVector) -> Result<Vec<f64>> {
    let prox = prox_sorted_l1(u, gamma, lambda)?;
    Ok(u.iter().zip(&prox.eta).map(|(a, b)| a - b).collect())
}

/// `∂η(u; γ)/∂γ`.
///
/// On an active group `I` the prox magnitude is `mean_{r∈I}(|u|_(r) − γλ_r)`,
/// so the derivative is `−sign(u_j) · mean_{r∈I} λ_r`; inactive coordinates
/// have derivative zero. Where the partition changes exactly at `γ` this is
/// the right-hand derivative: groups with equal values are already pooled,
/// and increasing `γ` never splits a pooled block.
pub fn prox_gamma_derivative(u: &[f64], gamma: f64, lambda: &WeightVector) -> Result<Vec<f64>> {
    let prox = prox_sorted_l1(u, gamma, lambda)?;
    let lam = lambda.as_slice();
    let mut out = vec![0.0; u.len()];
    for g in prox.active_groups() {
        let mean = lam[g.start..g.end].iter().sum::<f64>() / g.len() as f64;
        for &i in prox.members(g) {
            out[i] = mean.copysign(-u[i]);
        }
    }
    Ok(out)
}
