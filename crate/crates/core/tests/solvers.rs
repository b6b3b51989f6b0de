use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slope_core::solvers::fit;
use slope_core::{
    cross_validate, dual_sorted_l1_norm, fit_bridge, fit_lasso, fit_ridge, fit_slope, gen_design, sorted_l1_norm,
    DesignKind, DesignSpec, EstimatorKind, LinearModelInstance, SignalKind, SignalSpec, SolverOptions, WeightVector,
};

fn instance(n: usize, p: usize, eps: f64, sigma: f64, seed: u64) -> LinearModelInstance {
    LinearModelInstance::generate(
        &DesignSpec::new(DesignKind::IidGaussian, n, p),
        &SignalSpec::new(SignalKind::UniformNonzero, eps, p),
        sigma,
        seed,
    )
    .unwrap()
}

fn decreasing_weights(p: usize) -> WeightVector {
    WeightVector::new((0..p).map(|i| 1.0 - 0.8 * i as f64 / p as f64).collect()).unwrap()
}

fn tight() -> SolverOptions {
    SolverOptions::new(1e-10, 200_000)
}

fn objective(inst: &LinearModelInstance, x: &[f64], gamma: f64, lam: &WeightVector) -> f64 {
    let r = &inst.a * DVector::from_column_slice(x) - DVector::from_column_slice(&inst.y);
    0.5 * r.norm_squared() + gamma * sorted_l1_norm(x, lam).unwrap()
}

#[test]
fn slope_fit_satisfies_kkt_and_zero_gap() {
    let inst = instance(60, 40, 0.2, 0.5, 11);
    let lam = decreasing_weights(40);
    let gamma = 0.3;
    let f = fit_slope(&inst, gamma, &lam, &tight()).unwrap();
    assert!(f.converged);
    // Aᵀ(y − Ax̂) must lie in γ·(dual ball) and attain γ‖x̂‖_λ
    let x = DVector::from_column_slice(&f.x_hat);
    let g: Vec<f64> = (inst.a.transpose() * (DVector::from_column_slice(&inst.y) - &inst.a * &x)).data.into();
    let dual = dual_sorted_l1_norm(&g, &lam).unwrap();
    assert!(dual <= gamma * (1.0 + 1e-6), "{dual}");
    let inner: f64 = g.iter().zip(&f.x_hat).map(|(a, b)| a * b).sum();
    let pen = gamma * sorted_l1_norm(&f.x_hat, &lam).unwrap();
    assert!((inner - pen).abs() <= 1e-6 * (1.0 + pen));
    // duality gap with the feasible dual point θ = y − Ax̂ scaled into the ball
    let r: Vec<f64> = (DVector::from_column_slice(&inst.y) - &inst.a * &x).data.into();
    let scale = (gamma / dual).min(1.0);
    let theta: Vec<f64> = r.iter().map(|v| v * scale).collect();
    let y2: f64 = inst.y.iter().map(|v| v * v).sum();
    let dual_obj = 0.5 * y2 - 0.5 * inst.y.iter().zip(&theta).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let primal = objective(&inst, &f.x_hat, gamma, &lam);
    assert!(primal - dual_obj <= 1e-7 * (1.0 + primal), "gap {}", primal - dual_obj);
}

/// Cyclic coordinate descent for ½‖y − Ax‖² + γ‖x‖₁.
fn lasso_cd(a: &DMatrix<f64>, y: &[f64], gamma: f64) -> Vec<f64> {
    let (n, p) = a.shape();
    let mut x = vec![0.0; p];
    let mut r: Vec<f64> = y.to_vec();
    let col_sq: Vec<f64> = (0..p).map(|j| a.column(j).norm_squared()).collect();
    for _ in 0..20_000 {
        let mut delta = 0.0f64;
        for j in 0..p {
            let rho: f64 = (0..n).map(|i| a[(i, j)] * r[i]).sum::<f64>() + col_sq[j] * x[j];
            let new = rho.signum() * (rho.abs() - gamma).max(0.0) / col_sq[j];
            let d = new - x[j];
            if d != 0.0 {
                for i in 0..n {
                    r[i] -= a[(i, j)] * d;
                }
                x[j] = new;
                delta = delta.max(d.abs());
            }
        }
        if delta < 1e-14 {
            break;
        }
    }
    x
}

#[test]
fn lasso_matches_coordinate_descent() {
    let inst = instance(50, 30, 0.3, 0.3, 5);
    let gamma = 0.2;
    let f = fit_lasso(&inst, gamma, &tight()).unwrap();
    let oracle = lasso_cd(&inst.a, &inst.y, gamma);
    for (a, b) in f.x_hat.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn lasso_is_slope_with_unit_weights() {
    let inst = instance(40, 50, 0.2, 0.5, 9);
    let opts = SolverOptions::default();
    let a = fit_lasso(&inst, 0.4, &opts).unwrap();
    let b = fit_slope(&inst, 0.4, &WeightVector::constant(50), &opts).unwrap();
    assert_eq!(a.x_hat, b.x_hat);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn bridge_two_is_ridge() {
    for (n, p) in [(40, 25), (25, 40)] {
        let inst = instance(n, p, 0.4, 0.5, 3);
        let r = fit_ridge(&inst, 0.7).unwrap();
        let b = fit_bridge(&inst, 0.7, 2.0, &tight()).unwrap();
        assert!(b.converged);
        for (x, y) in r.x_hat.iter().zip(&b.x_hat) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }
}

#[test]
fn ridge_closed_form_residual() {
    let inst = instance(30, 20, 0.5, 1.0, 4);
    let gamma = 0.9;
    let f = fit_ridge(&inst, gamma).unwrap();
    let x = DVector::from_column_slice(&f.x_hat);
    let lhs = inst.a.transpose() * (&inst.a * &x) + 2.0 * gamma * &x;
    let rhs = inst.a.transpose() * DVector::from_column_slice(&inst.y);
    assert!((lhs - rhs).amax() < 1e-10);
}

#[test]
fn bridge_stationarity() {
    let inst = instance(50, 30, 0.3, 0.5, 8);
    let (gamma, q) = (0.3, 1.5);
    let f = fit_bridge(&inst, gamma, q, &tight()).unwrap();
    assert!(f.converged);
    let x = DVector::from_column_slice(&f.x_hat);
    let g = inst.a.transpose() * (DVector::from_column_slice(&inst.y) - &inst.a * &x);
    for j in 0..30 {
        let d = gamma * q * x[j].signum() * x[j].abs().powf(q - 1.0);
        assert!((g[j] - d).abs() < 1e-6, "coordinate {j}: {} vs {d}", g[j]);
    }
}

#[test]
fn weight_scaling_invariance() {
    let inst = instance(60, 40, 0.2, 0.5, 21);
    let lam = decreasing_weights(40);
    let base = fit_slope(&inst, 0.3, &lam, &tight()).unwrap();
    for t in [0.5, 4.0] {
        let f = fit_slope(&inst, 0.3 / t, &lam.scaled(t), &tight()).unwrap();
        for (a, b) in f.x_hat.iter().zip(&base.x_hat) {
            assert!((a - b).abs() < 1e-7);
        }
    }
}

#[test]
fn converged_fit_resists_perturbation() {
    let opts = SolverOptions::new(1e-8, 100_000);
    let inst = instance(60, 40, 0.2, 0.5, 13);
    let lam = decreasing_weights(40);
    let gamma = 0.5;
    let f = fit_slope(&inst, gamma, &lam, &opts).unwrap();
    assert!(f.converged);
    let base = objective(&inst, &f.x_hat, gamma, &lam);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let dir: Vec<f64> = (0..40).map(|_| rng.random::<f64>() - 0.5).collect();
        let nd = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        for s in [-1e-6, 1e-6] {
            let x: Vec<f64> = f.x_hat.iter().zip(&dir).map(|(a, d)| a + s * d / nd).collect();
            assert!(objective(&inst, &x, gamma, &lam) >= base - 10.0 * opts.tol);
        }
    }
}

#[test]
fn huge_penalty_gives_zero() {
    let inst = instance(40, 30, 0.3, 0.5, 1);
    let f = fit_slope(&inst, 1e6, &decreasing_weights(30), &SolverOptions::default()).unwrap();
    assert!(f.x_hat.iter().all(|v| *v == 0.0));
}

#[test]
fn ridge_cv_curve_is_u_shaped() {
    let grid: Vec<f64> = (0..25).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 24.0)).collect();
    let mut interior = 0;
    for seed in 0..20 {
        let inst = instance(200, 100, 1.0, 1.0, 100 + seed);
        let cv = cross_validate(&inst, &EstimatorKind::Ridge, &grid, 5, seed, &SolverOptions::default()).unwrap();
        if cv.best_index > 0 && cv.best_index + 1 < grid.len() {
            interior += 1;
        }
    }
    assert!(interior >= 18, "{interior}/20 interior minima");
}

#[test]
fn correlated_and_heavy_designs_fit() {
    let p = 40;
    for kind in [DesignKind::Correlated, DesignKind::HeavyTail, DesignKind::CorrelatedHeavyTail] {
        let spec = DesignSpec::new(kind, 60, p).with_rho(0.5);
        let a = gen_design(&spec, 7).unwrap();
        let x: Vec<f64> = (0..p).map(|i| if i % 5 == 0 { 2.0 } else { 0.0 }).collect();
        let y: Vec<f64> = (&a * DVector::from_column_slice(&x)).data.into();
        let inst = LinearModelInstance::new(a, y).unwrap();
        let f = fit(&inst, &EstimatorKind::Slope { weights: decreasing_weights(p) }, 1e-3, &tight()).unwrap();
        assert!(f.converged, "{kind:?}");
    }
}
