//! Bessel functions of the first kind and integer order.

use std::f64::consts::PI;

const RESCALE: f64 = 1e250;

/// `J_n(x)` for integer `n >= 0` and real `x`.
///
/// Miller's downward recurrence normalised by the sum rule
/// `J_0 + 2 Σ J_2k = 1` for `|x| <= 25`; Hankel asymptotics for `J_0`,
/// `J_1` beyond, then upward recurrence when `n < x` and a downward
/// sweep anchored on the asymptotic values otherwise.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= 25.0 {
        return miller_sum_rule(n, x);
    }
    let j0 = hankel(0.0, x);
    if n == 0 {
        return j0;
    }
    let j1 = hankel(1.0, x);
    if n == 1 {
        return j1;
    }
    if (n as f64) < x {
        let (mut a, mut b) = (j0, j1);
        for k in 1..n {
            let c = 2.0 * k as f64 / x * b - a;
            a = b;
            b = c;
        }
        b
    } else {
        miller_anchored(n, x, j0, j1)
    }
}

fn start_index(n: u32, x: f64) -> u32 {
    let top = (n as f64).max(x);
    let m = top + 30.0 + (50.0 * top).sqrt();
    2 * ((m as u32 + 1) / 2)
}

fn miller_sum_rule(n: u32, x: f64) -> f64 {
    let m = start_index(n, x);
    let (mut jp, mut j) = (0.0_f64, 1e-30_f64);
    let mut sum = 0.0;
    let mut ans = 0.0;
    for k in (1..=m).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if j.abs() > RESCALE {
            j /= RESCALE;
            jp /= RESCALE;
            ans /= RESCALE;
            sum /= RESCALE;
        }
        let idx = k - 1;
        if idx % 2 == 0 && idx > 0 {
            sum += 2.0 * j;
        }
        if idx == n {
            ans = j;
        }
    }
    sum += j;
    ans / sum
}

fn miller_anchored(n: u32, x: f64, j0: f64, j1: f64) -> f64 {
    let m = start_index(n, x);
    let (mut jp, mut j) = (0.0_f64, 1e-30_f64);
    let mut ans = 0.0;
    let mut u1 = 0.0;
    for k in (1..=m).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if j.abs() > RESCALE {
            j /= RESCALE;
            jp /= RESCALE;
            ans /= RESCALE;
        }
        if k - 1 == n {
            ans = j;
        }
        if k == 1 {
            u1 = jp;
        }
    }
    let u0 = j;
    // Anchor on whichever of J_0, J_1 is further from a zero.
    if j0.abs() > j1.abs() {
        ans / u0 * j0
    } else {
        ans / u1 * j1
    }
}

/// Hankel asymptotic expansion of `J_ν(x)` for large `x`.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
