//! Complex polynomials in ascending coefficient order.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Product of two polynomials.
pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Horner evaluation of the polynomial and its derivative.
pub fn eval(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All roots, from the eigenvalues of the companion matrix followed by a
/// few Newton polishing steps.
pub fn roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = c.iter().rposition(|a| a.norm() > 0.0).unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -c[deg - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let eig = comp.schur().eigenvalues().ok_or_else(|| Error::NoConvergence { iterations: 0, residuals: vec![] })?;
    let mut out: Vec<Complex64> = eig.iter().copied().collect();
    for z in &mut out {
        for _ in 0..8 {
            let (p, dp) = eval(&c[..=deg], *z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let candidate = *z - step;
            if eval(&c[..=deg], candidate).0.norm() >= p.norm() {
                break;
            }
            *z = candidate;
        }
    }
    Ok(out)
}
