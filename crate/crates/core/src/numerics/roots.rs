//! Safeguarded scalar root finding.

use crate::error::{Error, Result};

/// Finds a root of `f` in `[lo, hi]`, where `f` returns `(value, derivative)`
/// and changes sign on the bracket.
///
/// Starts with bisection until the bracket is 1e-3 of its original size,
/// then takes Newton steps, falling back to bisection whenever a step
/// leaves the bracket.
pub fn bisect_newton<F>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() && !fb.is_finite() {
        return Err(Error::Inconsistent(format!("no sign change on [{a}, {b}]: f = {fa}, {fb}")));
    }
    let a_neg = fa < 0.0;
    let width0 = b - a;
    let mut x = 0.5 * (a + b);
    for _ in 0..400 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == a_neg {
            a = x;
        } else {
            b = x;
        }
        if b - a <= xtol * x.abs().max(1e-300) {
            return Ok(0.5 * (a + b));
        }
        let newton = x - fx / dfx;
        let use_newton = b - a < 1e-3 * width0 && dfx.is_finite() && dfx != 0.0 && newton > a && newton < b;
        let next = if use_newton { newton } else { 0.5 * (a + b) };
        if use_newton && (next - x).abs() <= xtol * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Plain bisection on a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    bisect_newton(|x| (f(x), f64::NAN), lo, hi, xtol)
}
