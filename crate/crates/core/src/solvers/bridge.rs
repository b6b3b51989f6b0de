//! Scalar proximal map of `τ|·|^q` for `q > 1`.

/// `argmin_s ½(s − u)² + τ|s|^q`, with a flag that is false only if the
/// safeguarded iteration hit its cap.
///
/// For `u ≠ 0` the minimizer has the sign of `u` and its magnitude is the
/// unique root of `φ(s) = s + τq s^{q−1} − |u|` on `(0, |u|)`. Newton steps
/// that leave the current bracket are replaced by bisection.
pub fn bridge_prox_scalar(u: f64, tau: f64, q: f64) -> (f64, bool) {
    let target = u.abs();
    if target == 0.0 || tau == 0.0 {
        return (u, true);
    }
    let c = tau * q;
    let phi = |s: f64| s + c * s.powf(q - 1.0) - target;
    let dphi = |s: f64| 1.0 + c * (q - 1.0) * s.powf(q - 2.0);

    let (mut lo, mut hi) = (0.0f64, target);
    // closed form for the ridge case
    let mut s = if q == 2.0 { target / (1.0 + 2.0 * tau) } else { target / (1.0 + c) };
    for _ in 0..200 {
        let f = phi(s);
        if f == 0.0 {
            return (s.copysign(u), true);
        }
        if f > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let d = dphi(s);
        let mut next = s - f / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-15 * next.abs() || hi - lo <= 1e-15 * hi {
            return (next.copysign(u), true);
        }
        s = next;
    }
    (s.copysign(u), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn by_bisection(u: f64, tau: f64, q: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, u.abs());
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid + tau * q * mid.powf(q - 1.0) < u.abs() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).copysign(u)
    }

    #[test]
    fn zero_maps_to_zero() {
        assert_eq!(bridge_prox_scalar(0.0, 1.0, 1.5).0, 0.0);
    }

    #[test]
    fn matches_bisection_oracle() {
        // t + 1.5 t^0.5 = 2
        let (s, ok) = bridge_prox_scalar(2.0, 1.0, 1.5);
        assert!(ok);
        assert!((s - by_bisection(2.0, 1.0, 1.5)).abs() < 1e-12);
        assert!((s + 1.5 * s.sqrt() - 2.0).abs() < 1e-12);
        for &(u, tau, q) in &[(-3.0, 0.2, 1.1), (0.01, 5.0, 1.5), (7.0, 0.3, 3.0), (1.0, 1e-8, 1.9), (-2.0, 1.0, 2.0)] {
            let (s, ok) = bridge_prox_scalar(u, tau, q);
            assert!(ok);
            let o = by_bisection(u, tau, q);
            assert!((s - o).abs() <= 1e-12 * (1.0 + o.abs()), "{u} {tau} {q}: {s} vs {o}");
        }
    }

    #[test]
    fn ridge_case_is_linear() {
        let (s, _) = bridge_prox_scalar(3.0, 0.25, 2.0);
        assert!((s - 3.0 / 1.5).abs() < 1e-15);
    }
}
