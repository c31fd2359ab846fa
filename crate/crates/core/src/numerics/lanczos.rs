//! Lanczos iteration with full reorthogonalisation for a few extremal
//! eigenpairs of a large symmetric operator.

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Lowest,
    Highest,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Ritz residual `|β_m s_m|` relative to `max(1, |θ|)`.
    pub tol: f64,
    /// Krylov basis size before an explicit restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Seed of the start vector.
    pub seed: u64,
    pub exec: Exec,
}

impl Default for Options {
    fn default() -> Self {
        Self { tol: 1e-10, max_basis: 320, max_restarts: 30, seed: 0x5eed, exec: Exec::default() }
    }
}

/// Eigenpair with its true residual norm `‖A v − θ v‖`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// The `k` lowest (or highest) eigenpairs of the symmetric operator
/// `apply(x, y): y = A x` of dimension `n`, sorted by value ascending
/// (descending for [`Which::Highest`]).
///
/// Restarts are thick: the wanted Ritz vectors plus a block of their
/// neighbours are kept, together with the current residual direction.
pub fn extremal<F>(n: usize, apply: F, k: usize, which: Which, opts: Options) -> Result<Vec<Eigenpair>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let k = k.min(n).max(1);
    let sign = if which == Which::Highest { -1.0 } else { 1.0 };
    let exec = opts.exec;
    let op = |x: &[f64], y: &mut [f64]| {
        apply(x, y);
        if sign < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
    };
    let m_max = opts.max_basis.min(n).max(k + 2).min(n);
    let keep = (k + m_max / 3).min(m_max.saturating_sub(2)).max(k.min(m_max - 1));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize(exec, &mut v0);
    let mut basis: Vec<Vec<f64>> = vec![v0];
    // Projected matrix V^T A V, grown column by column.
    let mut t = DMatrix::<f64>::zeros(m_max, m_max);
    let mut w = vec![0.0; n];
    let mut iterations = 0;
    let mut restarts = 0;
    let mut last_residuals: Vec<f64>;

    loop {
        let j = basis.len() - 1;
        op(&basis[j], &mut w);
        iterations += 1;
        let mut h = vec![0.0; j + 1];
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = par::dot(exec, v, &w);
                h[i] += c;
                par::axpy(exec, -c, v, &mut w);
            }
        }
        for (i, hi) in h.iter().enumerate() {
            t[(i, j)] = *hi;
            t[(j, i)] = *hi;
        }
        let b = par::dot(exec, &w, &w).sqrt();
        let m = j + 1;
        let scale = h[j].abs().max(1.0);
        let invariant = b < 1e-13 * scale || m >= n;
        if !(invariant || m == m_max || m % 8 == 0) {
            push_next(&mut basis, &mut w, b);
            continue;
        }
        let (theta, s) = sym_eigen(&t.view((0, 0), (m, m)).into_owned());
        let wanted = k.min(m);
        let resid: Vec<f64> = (0..wanted).map(|i| (b * s[(m - 1, i)]).abs()).collect();
        let converged = resid.iter().zip(&theta).all(|(r, th)| *r <= opts.tol * th.abs().max(1.0));
        if m >= k && (invariant || converged) {
            let mut out = Vec::with_capacity(wanted);
            for i in 0..wanted {
                let y = combine(exec, &basis, &s, i, n);
                op(&y, &mut w);
                let r = w.iter().zip(&y).map(|(p, q)| (p - theta[i] * q).powi(2)).sum::<f64>().sqrt();
                out.push(Eigenpair { value: sign * theta[i], vector: y, residual: r });
            }
            return Ok(out);
        }
        if invariant {
            return Err(Error::NoConvergence { iterations, residuals: resid });
        }
        if m < m_max {
            push_next(&mut basis, &mut w, b);
            continue;
        }
        last_residuals = resid;
        if restarts == opts.max_restarts {
            break;
        }
        restarts += 1;
        let mut kept: Vec<Vec<f64>> = (0..keep).map(|i| combine(exec, &basis, &s, i, n)).collect();
        t.fill(0.0);
        for i in 0..keep {
            t[(i, i)] = theta[i];
            t[(i, keep)] = b * s[(m - 1, i)];
            t[(keep, i)] = t[(i, keep)];
        }
        let mut r = std::mem::replace(&mut w, vec![0.0; n]);
        r.iter_mut().for_each(|x| *x /= b);
        kept.push(r);
        basis = kept;
        // The residual column is recomputed on expansion; start it from
        // the known couplings.
        let last = basis.len() - 1;
        op(&basis[last], &mut w);
        iterations += 1;
        let mut h = vec![0.0; last + 1];
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = par::dot(exec, v, &w);
                h[i] += c;
                par::axpy(exec, -c, v, &mut w);
            }
        }
        t[(last, last)] = h[last];
        let b = par::dot(exec, &w, &w).sqrt();
        if b < 1e-13 * h[last].abs().max(1.0) {
            // Exact invariant subspace: finish with the current basis.
            let (theta, s) = sym_eigen(&t.view((0, 0), (last + 1, last + 1)).into_owned());
            let mut out = Vec::with_capacity(k);
            for i in 0..k {
                let y = combine(exec, &basis, &s, i, n);
                op(&y, &mut w);
                let r = w.iter().zip(&y).map(|(p, q)| (p - theta[i] * q).powi(2)).sum::<f64>().sqrt();
                out.push(Eigenpair { value: sign * theta[i], vector: y, residual: r });
            }
            return Ok(out);
        }
        push_next(&mut basis, &mut w, b);
    }
    Err(Error::NoConvergence { iterations, residuals: last_residuals })
}

fn push_next(basis: &mut Vec<Vec<f64>>, w: &mut Vec<f64>, b: f64) {
    let n = w.len();
    let mut next = std::mem::replace(w, vec![0.0; n]);
    next.iter_mut().for_each(|v| *v /= b);
    basis.push(next);
}

fn combine(exec: Exec, basis: &[Vec<f64>], s: &DMatrix<f64>, col: usize, n: usize) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for (l, v) in basis.iter().enumerate() {
        par::axpy(exec, s[(l, col)], v, &mut y);
    }
    normalize(exec, &mut y);
    y
}

fn normalize(exec: Exec, v: &mut [f64]) {
    let nrm = par::dot(exec, v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
}

/// Ascending eigenvalues and eigenvectors (columns) of a small dense
/// symmetric matrix.
fn sym_eigen(t: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let m = t.nrows();
    let eig = SymmetricEigen::new(t.clone());
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}
