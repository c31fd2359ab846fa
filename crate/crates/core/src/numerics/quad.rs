//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 panel: Kronrod estimate and |Kronrod − Gauss|.
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Integrates `f` over `[a, b]` by recursive bisection until each panel's
/// error estimate is below its share of `tol` (absolute).
pub fn integrate<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, whole: Complex64, depth: u32) -> Complex64 {
        let m = 0.5 * (a + b);
        let (l, el) = gk15(f, a, m);
        let (r, er) = gk15(f, m, b);
        if depth >= 40 || (el + er <= tol) || ((l + r) - whole).norm() <= 1e-3 * tol {
            return l + r;
        }
        rec(f, a, m, 0.5 * tol, l, depth + 1) + rec(f, m, b, 0.5 * tol, r, depth + 1)
    }
    let (whole, err) = gk15(f, a, b);
    if err <= tol * 1e-3 {
        return whole;
    }
    rec(f, a, b, tol, whole, 0)
}

/// Integrates `f` over `[0, ∞)` in panels `[0, T], [T, 2T], [2T, 4T], …`
/// until `tail(t)`, an upper bound on `∫_t^∞ |f|`, drops below `tail_tol`.
pub fn integrate_to_infinity<F, B>(f: &F, first: f64, tol: f64, tail: B, tail_tol: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
    B: Fn(f64) -> f64,
{
    let mut total = Complex64::new(0.0, 0.0);
    let (mut a, mut b) = (0.0, first);
    loop {
        let n = ((b - a) / first).ceil().max(1.0) as usize;
        let w = (b - a) / n as f64;
        for i in 0..n {
            let lo = a + i as f64 * w;
            total += integrate(f, lo, lo + w, tol / n as f64);
        }
        if tail(b) < tail_tol || b > 1e9 {
            return total;
        }
        a = b;
        b *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(&|x: f64| Complex64::new(x.powi(5) - 2.0 * x, x * x), -1.0, 2.0, 1e-14);
        assert!((v.re - (64.0 / 6.0 - 1.0 / 6.0 - 3.0)).abs() < 1e-13);
        assert!((v.im - 3.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_decaying_to_infinity() {
        // ∫_0^∞ e^{(i - 0.1) t} dt = 1/(0.1 - i)
        let f = |t: f64| Complex64::new(-0.1 * t, t).exp();
        let v = integrate_to_infinity(&f, 8.0, 1e-12, |t| 10.0 * (-0.1 * t).exp(), 1e-13);
        let want = Complex64::new(1.0, 0.0) / Complex64::new(0.1, -1.0);
        assert!((v - want).norm() < 1e-10, "{v} vs {want}");
    }

    #[test]
    fn endpoint_singularity_is_handled() {
        let v = integrate(&|x: f64| Complex64::new(1.0 / x.sqrt(), 0.0), 0.0, 1.0, 1e-10);
        assert!((v.re - 2.0).abs() < 1e-6);
    }
}
