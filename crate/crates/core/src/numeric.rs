//! One-dimensional root finding and minimization.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Root of a decreasing-or-increasing `f` on `[lo, hi]` by bisection.
/// `f(lo)` and `f(hi)` must have opposite signs (or one be zero).
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!(
            "f({lo}) = {f_lo} and f({hi}) = {f_hi} have the same sign"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence(format!(
        "bisection did not reach relative width {rel_tol} in {max_iter} iterations"
    )))
}

/// Bracketed root by the Illinois variant of regula falsi.
///
/// Keeps a sign-changing bracket at every step, so it never leaves
/// `[a, b]`; converges superlinearly on smooth `f`.
pub fn illinois(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    fa: Option<f64>,
    fb: Option<f64>,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = match fa {
        Some(v) => v,
        None => f(a)?,
    };
    let mut fb = match fb {
        Some(v) => v,
        None => f(b)?,
    };
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "f({a}) = {fa} and f({b}) = {fb} have the same sign"
        )));
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        if (b - a).abs() <= x_tol * c.abs().max(f64::MIN_POSITIVE) {
            return Ok(c);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= x_tol * c.abs().max(f64::MIN_POSITIVE) {
            return Ok(0.5 * (a + b));
        }
    }
    Err(Error::Convergence(format!(
        "root finder did not converge in {max_iter} iterations"
    )))
}

/// Result of a one-dimensional minimization.
#[derive(Debug, Clone, Copy)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, x_tol: f64) -> Minimum {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        Minimum { x: c, value: fc }
    } else {
        Minimum { x: d, value: fd }
    }
}

/// Three-point bracket `(a, b, c)` with `f(b) ≤ f(a), f(c)` found on a
/// uniform grid over `[lo, hi]`. Returns `None` when the grid minimum sits
/// on an end point.
pub fn grid_bracket(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, points: usize) -> Option<(f64, f64, f64)> {
    assert!(points >= 3);
    let xs: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[best] {
            best = i;
        }
    }
    if best == 0 || best == points - 1 {
        return None;
    }
    Some((xs[best - 1], xs[best], xs[best + 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-14, 200).is_err());
    }

    #[test]
    fn illinois_finds_roots() {
        let r = illinois(|x| Ok(x.exp() - 3.0), 0.0, 5.0, None, None, 1e-14, 200).unwrap();
        assert!((r - 3f64.ln()).abs() < 1e-12);
        let r = illinois(|x| Ok(1.0 / x - 0.25), 0.5, 100.0, None, None, 1e-13, 400).unwrap();
        assert!((r - 4.0).abs() < 1e-10);
    }

    #[test]
    fn golden_finds_minimum() {
        let m = golden_section(|x| (x - 1.3).powi(2), -5.0, 5.0, 1e-10);
        assert!((m.x - 1.3).abs() < 1e-8);
        assert!(m.value < 1e-16);
    }

    #[test]
    fn bracket_rejects_monotone() {
        assert!(grid_bracket(|x| x, 0.0, 1.0, 5).is_none());
        let (a, b, c) = grid_bracket(|x| (x - 0.4).powi(2), 0.0, 1.0, 11).unwrap();
        assert!(a < 0.4 && 0.4 < c && (b - 0.4).abs() < 1e-12);
    }
}
