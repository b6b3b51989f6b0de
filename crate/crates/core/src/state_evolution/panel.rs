//! Frozen Gaussian panels and Monte Carlo prox moments.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::rng::{stream, stream_rng};
use crate::sorted_l1::{dual_sorted_l1_norm_unchecked, ProxWorkspace};

/// `samples × dim` iid standard normals, drawn once and reused for every
/// parameter value of one solve.
#[derive(Debug, Clone)]
pub(crate) struct Panel {
    data: Vec<f64>,
    dim: usize,
    samples: usize,
}

impl Panel {
    pub fn new(samples: usize, dim: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, stream::MC_PANEL);
        let data = (0..samples * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        Self { data, dim, samples }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    fn row(&self, s: usize) -> &[f64] {
        &self.data[s * self.dim..(s + 1) * self.dim]
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Moment {
    pub mean: f64,
    pub std_err: f64,
}

impl Moment {
    pub fn from_samples(v: impl ExactSizeIterator<Item = f64> + Clone) -> Self {
        let m = v.len() as f64;
        let mean = v.clone().sum::<f64>() / m;
        let var = if m > 1.0 {
            v.map(|a| (a - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_err: (var / m).sqrt(),
        }
    }
}

/// Normalized prox moments at `(x/σ, χ)`:
/// `r = (1/p)E‖η(x/σ + h; χ) − x/σ‖²` and `i = (1/p)E⟨η(x/σ + h; χ), h⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NormalizedRisk {
    pub risk: Moment,
    pub inner: Moment,
}

/// Evaluates prox moments of a fixed signal against a frozen panel.
pub(crate) struct SignalPanel<'a> {
    pub x: &'a [f64],
    pub lambda: &'a [f64],
    pub panel: Panel,
}

impl<'a> SignalPanel<'a> {
    pub fn new(x: &'a [f64], lambda: &'a [f64], samples: usize, seed: u64) -> Self {
        Self {
            x,
            lambda,
            panel: Panel::new(samples, x.len(), seed),
        }
    }

    /// Moments at `(x · inv_sigma, chi)`; `inv_sigma = 0` is the pure-noise
    /// limit `σ → ∞`.
    pub fn eval(&self, inv_sigma: f64, chi: f64) -> NormalizedRisk {
        let p = self.x.len();
        let pf = p as f64;
        let per_sample: Vec<(f64, f64)> = (0..self.panel.samples())
            .into_par_iter()
            .map_init(
                || (ProxWorkspace::new(p), vec![0.0; p], vec![0.0; p]),
                |(ws, u, eta), s| {
                    let h = self.panel.row(s);
                    for ((ui, xi), hi) in u.iter_mut().zip(self.x).zip(h) {
                        *ui = xi * inv_sigma + hi;
                    }
                    ws.prox_into(u, chi, self.lambda, eta);
                    let mut r = 0.0;
                    let mut i = 0.0;
                    for ((e, xi), hi) in eta.iter().zip(self.x).zip(h) {
                        r += (e - xi * inv_sigma).powi(2);
                        i += e * hi;
                    }
                    (r / pf, i / pf)
                },
            )
            .collect();
        NormalizedRisk {
            risk: Moment::from_samples(per_sample.iter().map(|v| v.0)),
            inner: Moment::from_samples(per_sample.iter().map(|v| v.1)),
        }
    }

    /// Smallest `χ` at which the prox vanishes on every panel row.
    pub fn zero_threshold(&self, inv_sigma: f64) -> f64 {
        let p = self.x.len();
        (0..self.panel.samples())
            .into_par_iter()
            .map_init(
                || vec![0.0; p],
                |u, s| {
                    for ((ui, xi), hi) in u.iter_mut().zip(self.x).zip(self.panel.row(s)) {
                        *ui = xi * inv_sigma + hi;
                    }
                    dual_sorted_l1_norm_unchecked(u, self.lambda)
                },
            )
            .reduce(|| 0.0, f64::max)
    }
}

/// `‖η(h; α, λ)‖²` for every row `h` of a pure-noise panel.
pub(crate) fn noise_prox_energy(panel: &Panel, lambda: &[f64], alpha: f64) -> Vec<f64> {
    let d = lambda.len();
    (0..panel.samples())
        .into_par_iter()
        .map_init(
            || (ProxWorkspace::new(d), vec![0.0; d]),
            |(ws, eta), s| {
                ws.prox_into(panel.row(s), alpha, lambda, eta);
                eta.iter().map(|e| e * e).sum::<f64>()
            },
        )
        .collect()
}
