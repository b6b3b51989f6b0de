use proptest::prelude::*;
use slope_core::{
    dual_sorted_l1_norm, isotonic_regression_nonincreasing, project_dual_ball, prox_sorted_l1, sorted_l1_norm,
    WeightVector,
};

fn weights(p: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(0.0f64..2.0, p).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        if v[0] == 0.0 {
            v[0] = 1.0;
        }
        WeightVector::new(v).unwrap()
    })
}

fn case() -> impl Strategy<Value = (Vec<f64>, WeightVector)> {
    (1usize..30).prop_flat_map(|p| (prop::collection::vec(-5.0f64..5.0, p), weights(p)))
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, WeightVector)> {
    (1usize..30).prop_flat_map(|p| {
        (
            prop::collection::vec(-5.0f64..5.0, p),
            prop::collection::vec(-5.0f64..5.0, p),
            weights(p),
        )
    })
}

fn eta(u: &[f64], gamma: f64, lam: &WeightVector) -> Vec<f64> {
    prox_sorted_l1(u, gamma, lam).unwrap().eta
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Exact optimality certificate for the prox: `u − x ∈ γ∂‖x‖_λ`, i.e. the
/// residual lies in the dual ball and attains the norm on `x`.
fn kkt_violation(u: &[f64], x: &[f64], gamma: f64, lam: &WeightVector) -> f64 {
    let r: Vec<f64> = u.iter().zip(x).map(|(a, b)| a - b).collect();
    let dual = dual_sorted_l1_norm(&r, lam).unwrap();
    let inner: f64 = r.iter().zip(x).map(|(a, b)| a * b).sum();
    let attained = (inner - gamma * sorted_l1_norm(x, lam).unwrap()).abs();
    (dual - gamma).max(0.0) + attained
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn prox_satisfies_optimality((u, lam) in case(), gamma in 0.01f64..5.0) {
        let x = eta(&u, gamma, &lam);
        prop_assert!(kkt_violation(&u, &x, gamma, &lam) <= 1e-10 * (1.0 + norm(&u)).powi(2));
    }

    #[test]
    fn scaling((u, lam) in case(), gamma in 0.0f64..5.0, t in 0.0f64..10.0) {
        let scaled: Vec<f64> = u.iter().map(|v| t * v).collect();
        let a = eta(&scaled, t * gamma, &lam);
        let b = eta(&u, gamma, &lam);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - t * y).abs() <= 1e-12 * (1.0 + t) * (1.0 + y.abs()));
        }
    }

    #[test]
    fn ordering((u, lam) in case(), gamma in 0.0f64..5.0) {
        let x = eta(&u, gamma, &lam);
        for i in 0..u.len() {
            // sign kept, magnitude shrunk
            prop_assert!(x[i] * u[i] >= 0.0);
            prop_assert!(x[i].abs() <= u[i].abs() + 1e-12);
            for j in 0..u.len() {
                if u[i].abs() >= u[j].abs() {
                    prop_assert!(x[i].abs() >= x[j].abs() - 1e-12);
                }
            }
        }
    }

    #[test]
    fn nonexpansive((u, v, lam) in pair(), gamma in 0.0f64..5.0) {
        let a = eta(&u, gamma, &lam);
        let b = eta(&v, gamma, &lam);
        prop_assert!(dist(&a, &b) <= dist(&u, &v) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn strong_duality((u, lam) in case(), gamma in 0.0f64..5.0) {
        let x = eta(&u, gamma, &lam);
        let primal = 0.5 * dist(&u, &x).powi(2) + gamma * sorted_l1_norm(&x, &lam).unwrap();
        let dual = 0.5 * (norm(&u).powi(2) - norm(&x).powi(2));
        prop_assert!((primal - dual).abs() <= 1e-10 * primal.abs().max(1e-300), "{} vs {}", primal, dual);
    }

    #[test]
    fn lipschitz_in_gamma((u, lam) in case(), g1 in 0.0f64..5.0, g2 in 0.0f64..5.0) {
        let a = eta(&u, g1, &lam);
        let b = eta(&u, g2, &lam);
        prop_assert!(dist(&a, &b) <= lam.norm2() * (g1 - g2).abs() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn norm_decreases_in_gamma((u, lam) in case()) {
        let norms: Vec<f64> = (0..40).map(|k| norm(&eta(&u, 0.1 * k as f64, &lam))).collect();
        prop_assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn lasso_comparison((u, lam) in case(), gamma in 0.0f64..5.0) {
        // the bound needs λ₁ ≤ 1
        let lam = lam.normalized().unwrap();
        let p = u.len();
        let level = lam.norm2_sq() / p as f64;
        let flat = WeightVector::new(vec![level; p]).unwrap();
        prop_assert!(norm(&eta(&u, gamma, &lam)) <= norm(&eta(&u, gamma, &flat)) + 1e-12);
    }

    #[test]
    fn weight_monotonicity((u, lam) in case(), gamma in 0.0f64..5.0, bumps in prop::collection::vec(0.0f64..1.0, 30)) {
        // λ₁ = λ₂ + nonincreasing nonnegative bump keeps λ₁ sorted and λ₁ ≥ λ₂
        let mut bump: Vec<f64> = bumps[..u.len()].to_vec();
        bump.sort_by(|a, b| b.total_cmp(a));
        let big = WeightVector::new(lam.as_slice().iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
        let a = eta(&u, gamma, &big);
        let b = eta(&u, gamma, &lam);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x.abs() <= y.abs() + 1e-12);
        }
    }

    #[test]
    fn dual_ball_diameter((u, lam) in case(), gamma in 0.0f64..5.0) {
        let lam_vec = lam.as_slice().to_vec();
        let unit = dual_sorted_l1_norm(&lam_vec, &lam).unwrap();
        prop_assert!((unit - 1.0).abs() <= 1e-12);
        let v = project_dual_ball(&u, gamma, &lam).unwrap();
        prop_assert!(norm(&v) <= gamma * lam.norm2() * (1.0 + 1e-12) + 1e-12);
        prop_assert!(dual_sorted_l1_norm(&v, &lam).unwrap() <= gamma * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn moreau_decomposition((u, lam) in case(), gamma in 0.0f64..5.0) {
        let x = eta(&u, gamma, &lam);
        let v = project_dual_ball(&u, gamma, &lam).unwrap();
        for i in 0..u.len() {
            prop_assert!((x[i] + v[i] - u[i]).abs() <= 1e-12 * (1.0 + u[i].abs()));
        }
    }

    #[test]
    fn isotonic_is_projection(a in prop::collection::vec(-5.0f64..5.0, 1..40), probe in prop::collection::vec(-5.0f64..5.0, 40)) {
        // optimality on the cone: ⟨a − x, z − x⟩ ≤ 0 for every nonincreasing z
        let x = isotonic_regression_nonincreasing(&a).unwrap();
        prop_assert!(x.windows(2).all(|w| w[0] >= w[1]));
        let mut z = probe[..a.len()].to_vec();
        z.sort_by(|p, q| q.total_cmp(p));
        let ip: f64 = a.iter().zip(&x).zip(&z).map(|((ai, xi), zi)| (ai - xi) * (zi - xi)).sum();
        prop_assert!(ip <= 1e-9);
    }
}

#[test]
fn ties_are_shared() {
    // equal inputs stay equal and may be pooled with unequal weights
    let lam = WeightVector::new(vec![1.5, 0.5]).unwrap();
    let r = prox_sorted_l1(&[2.0, -2.0], 1.0, &lam).unwrap();
    assert_eq!(r.eta, vec![1.0, -1.0]);
}
