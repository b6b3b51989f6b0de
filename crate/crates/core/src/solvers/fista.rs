//! Accelerated proximal gradient with monotone restart.

use nalgebra::{DMatrix, DVector};

use crate::sorted_l1::{dual_sorted_l1_norm_unchecked, sorted_l1_norm_unchecked, ProxWorkspace};

use super::bridge::bridge_prox_scalar;

/// A convex penalty with a cheap proximal map.
pub(crate) trait Penalty {
    fn value(&self, x: &[f64]) -> f64;
    /// `argmin_v ½‖u − v‖² + step · penalty(v)` into `out`.
    fn prox(&mut self, u: &[f64], step: f64, out: &mut [f64]);
    /// Optimality residual at `x`, where `g = Aᵀ(y − Ax)`.
    fn kkt(&self, x: &[f64], g: &[f64], objective: f64) -> f64;
}

pub(crate) struct SlopePenalty<'a> {
    pub gamma: f64,
    pub lambda: &'a [f64],
    ws: ProxWorkspace,
}

impl<'a> SlopePenalty<'a> {
    pub fn new(gamma: f64, lambda: &'a [f64]) -> Self {
        Self {
            gamma,
            lambda,
            ws: ProxWorkspace::new(lambda.len()),
        }
    }
}

impl Penalty for SlopePenalty<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.gamma * sorted_l1_norm_unchecked(x, self.lambda)
    }

    fn prox(&mut self, u: &[f64], step: f64, out: &mut [f64]) {
        self.ws.prox_into(u, step * self.gamma, self.lambda, out);
    }

    fn kkt(&self, x: &[f64], g: &[f64], objective: f64) -> f64 {
        let infeasible = (dual_sorted_l1_norm_unchecked(g, self.lambda) - self.gamma).max(0.0) / self.gamma;
        let inner: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
        let gap = (self.value(x) - inner).abs() / (1.0 + objective.abs());
        infeasible.max(gap)
    }
}

pub(crate) struct BridgePenalty {
    pub gamma: f64,
    pub q: f64,
    /// `max(1, ‖Aᵀy‖∞)`, the scale of the stationarity residual.
    pub scale: f64,
    pub failures: usize,
}

impl Penalty for BridgePenalty {
    fn value(&self, x: &[f64]) -> f64 {
        self.gamma * x.iter().map(|v| v.abs().powf(self.q)).sum::<f64>()
    }

    fn prox(&mut self, u: &[f64], step: f64, out: &mut [f64]) {
        let tau = step * self.gamma;
        for (o, &ui) in out.iter_mut().zip(u) {
            let (v, ok) = bridge_prox_scalar(ui, tau, self.q);
            if !ok {
                self.failures += 1;
            }
            *o = v;
        }
    }

    fn kkt(&self, x: &[f64], g: &[f64], _objective: f64) -> f64 {
        let worst = x
            .iter()
            .zip(g)
            .map(|(&xi, &gi)| (gi - self.gamma * self.q * xi.abs().powf(self.q - 1.0).copysign(xi)).abs())
            .fold(0.0, f64::max);
        worst / self.scale
    }
}

/// Largest eigenvalue of `AᵀA` by power iteration (at most 50 steps or
/// relative change below 1e−10).
pub(crate) fn lipschitz_constant(a: &DMatrix<f64>) -> f64 {
    let p = a.ncols();
    // deterministic start with no special alignment
    let mut v = DVector::from_fn(p, |i, _| 1.0 + ((i * 7919) % 13) as f64 / 13.0);
    v /= v.norm();
    let mut av = DVector::zeros(a.nrows());
    let mut w = DVector::zeros(p);
    let mut est = 0.0;
    for _ in 0..50 {
        av.gemv(1.0, a, &v, 0.0);
        w.gemv_tr(1.0, a, &av, 0.0);
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v.copy_from(&w);
        v /= next;
        let done = (next - est).abs() <= 1e-10 * next;
        est = next;
        if done {
            break;
        }
    }
    est
}

pub(crate) struct FistaOutput {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub kkt: f64,
    pub converged: bool,
}

const CHECK_EVERY: usize = 10;
const STEP_SAFETY: f64 = 1.02;

fn half_sq_dist(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    0.5 * a.iter().zip(b.iter()).map(|(u, v)| (u - v).powi(2)).sum::<f64>()
}

/// Minimizes `½‖y − Ax‖² + penalty(x)`.
pub(crate) fn fista<P: Penalty>(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    penalty: &mut P,
    lipschitz: f64,
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> FistaOutput {
    let p = a.ncols();
    let mut l = (lipschitz * STEP_SAFETY).max(f64::MIN_POSITIVE);

    let mut x = DVector::from_column_slice(x0.unwrap_or(&vec![0.0; p]));
    let mut ax = a * &x;
    let mut f_x = half_sq_dist(&ax, y) + penalty.value(x.as_slice());

    let mut yk = x.clone();
    let mut ayk = ax.clone();
    let mut momentum = false;
    let mut t = 1.0f64;

    let mut z = DVector::zeros(p);
    let mut az = DVector::zeros(a.nrows());
    let mut u = DVector::zeros(p);
    let mut g = DVector::zeros(p);
    let mut resid = DVector::zeros(a.nrows());

    let mut kkt = f64::INFINITY;
    let mut iterations = 0;
    let mut since_check = CHECK_EVERY;

    let check = |x: &DVector<f64>, ax: &DVector<f64>, f_x: f64, penalty: &P, resid: &mut DVector<f64>, g: &mut DVector<f64>| {
        resid.copy_from(y);
        *resid -= ax;
        g.gemv_tr(1.0, a, resid, 0.0);
        penalty.kkt(x.as_slice(), g.as_slice(), f_x)
    };

    while iterations < max_iter {
        if since_check >= CHECK_EVERY {
            since_check = 0;
            kkt = check(&x, &ax, f_x, penalty, &mut resid, &mut g);
            if kkt <= tol {
                return FistaOutput {
                    x: x.data.into(),
                    iterations,
                    objective: f_x,
                    kkt,
                    converged: true,
                };
            }
        }
        iterations += 1;
        since_check += 1;

        // gradient at the extrapolated point: Aᵀ(A yk − y)
        resid.copy_from(&ayk);
        resid -= y;
        g.gemv_tr(1.0, a, &resid, 0.0);
        u.copy_from(&yk);
        u.axpy(-1.0 / l, &g, 1.0);
        penalty.prox(u.as_slice(), 1.0 / l, z.as_mut_slice());
        az.gemv(1.0, a, &z, 0.0);
        let f_z = half_sq_dist(&az, y) + penalty.value(z.as_slice());

        // NaN counts as an increase
        let decreased = f_z <= f_x + 1e-14 * (1.0 + f_x.abs());
        if !decreased {
            if momentum {
                // restart from the last accepted iterate
                momentum = false;
                t = 1.0;
                yk.copy_from(&x);
                ayk.copy_from(&ax);
            } else {
                // a plain step failed: the step size was too long
                l *= 2.0;
            }
            continue;
        }
        debug_assert!(f_z <= f_x + 1e-14 * (1.0 + f_x.abs()));

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        // yk = z + β(z − x), and likewise for A yk
        yk.copy_from(&z);
        yk.axpy(-beta, &x, 1.0 + beta);
        ayk.copy_from(&az);
        ayk.axpy(-beta, &ax, 1.0 + beta);
        momentum = beta != 0.0;
        std::mem::swap(&mut x, &mut z);
        std::mem::swap(&mut ax, &mut az);
        f_x = f_z;
        t = t_next;
    }

    kkt = if since_check == 0 {
        kkt
    } else {
        check(&x, &ax, f_x, penalty, &mut resid, &mut g)
    };
    FistaOutput {
        x: x.data.into(),
        iterations,
        objective: f_x,
        kkt,
        converged: kkt <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_on_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 0.5]));
        assert!((lipschitz_constant(&a) - 9.0).abs() < 1e-6);
    }
}
