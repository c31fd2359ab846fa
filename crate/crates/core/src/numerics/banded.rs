//! Banded matrices: bandwidth-reducing ordering, inertia counting and
//! pivoted LU solves.
//!
//! Used for single-excitation problems on long lattices, where the
//! Hamiltonian has a handful of nonzeros per row but `N` reaches 10⁴.

use super::sparse::Csr;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::VecDeque;

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (deg[i], i));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&u| !seen[u]).collect();
            nb.sort_by_key(|&u| (deg[u], u));
            nb.dedup();
            for u in nb {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Inverse of a permutation.
pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Half bandwidth of `a` under the ordering `perm`.
pub fn bandwidth(a: &Csr, perm: &[usize]) -> usize {
    let inv = invert(perm);
    (0..a.n).flat_map(|r| a.row(r).map(move |(c, _)| (r, c))).map(|(r, c)| inv[r].abs_diff(inv[c])).max().unwrap_or(0)
}

/// Symmetric adjacency lists of the off-diagonal pattern.
pub fn pattern(a: &Csr) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); a.n];
    for r in 0..a.n {
        for (c, _) in a.row(r) {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

/// Real symmetric band matrix, lower band stored row-wise:
/// `data[i * (k + 1) + j] = A[i][i - j]`.
#[derive(Debug, Clone)]
pub struct SymBand {
    pub n: usize,
    pub k: usize,
    data: Vec<f64>,
}

impl SymBand {
    /// Band form of the symmetric matrix `a` reordered by `perm`.
    pub fn from_csr(a: &Csr, perm: &[usize]) -> Self {
        let inv = invert(perm);
        let k = bandwidth(a, perm);
        let mut data = vec![0.0; a.n * (k + 1)];
        for r in 0..a.n {
            for (c, v) in a.row(r) {
                let (i, j) = (inv[r], inv[c]);
                if j <= i {
                    data[i * (k + 1) + (i - j)] += v;
                }
            }
        }
        Self { n: a.n, k, data }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.k + 1) + (i - j)]
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia of
    /// the `LDLᵀ` factorisation of `A − σI`).
    pub fn count_below(&self, sigma: f64) -> usize {
        let (n, k) = (self.n, self.k);
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(sigma.abs()).max(1e-300);
        let tiny = f64::EPSILON * f64::EPSILON * scale;
        let mut l = vec![0.0; n * (k + 1)];
        let mut d = vec![0.0; n];
        let mut neg = 0;
        for i in 0..n {
            let lo = i.saturating_sub(k);
            for j in lo..i {
                let mut s = self.at(i, j);
                let mlo = lo.max(j.saturating_sub(k));
                for m in mlo..j {
                    s -= l[i * (k + 1) + (i - m)] * d[m] * l[j * (k + 1) + (j - m)];
                }
                l[i * (k + 1) + (i - j)] = s / d[j];
            }
            let mut s = self.at(i, i) - sigma;
            for m in lo..i {
                let lim = l[i * (k + 1) + (i - m)];
                s -= lim * lim * d[m];
            }
            if s.abs() < tiny {
                s = -tiny;
            }
            if s < 0.0 {
                neg += 1;
            }
            d[i] = s;
        }
        neg
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut off = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.k)..i {
                let v = self.at(i, j).abs();
                off[i] += v;
                off[j] += v;
            }
        }
        (0..self.n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let c = self.at(i, i);
            (lo.min(c - off[i]), hi.max(c + off[i]))
        })
    }

    /// The `index`-th smallest eigenvalue (zero-based) by bisection.
    pub fn eigenvalue(&self, index: usize, tol: f64) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        lo -= 1e-12 * (1.0 + lo.abs());
        hi += 1e-12 * (1.0 + hi.abs());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= tol * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// General complex band matrix with `kl` sub- and `ku` super-diagonals,
/// factorised in place by Gaussian elimination with partial pivoting.
#[derive(Debug, Clone)]
pub struct ComplexBandLu {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    data: Vec<Complex64>,
    piv: Vec<usize>,
}

impl ComplexBandLu {
    /// Factorises the matrix given as triplets in the new ordering
    /// (indices already permuted).
    pub fn factor(n: usize, kl: usize, ku: usize, entries: &[(usize, usize, Complex64)]) -> Result<Self> {
        let w = 2 * kl + ku + 1;
        let mut m = Self { n, kl, ku, w, data: vec![Complex64::new(0.0, 0.0); n * w], piv: vec![0; n] };
        for &(i, j, v) in entries {
            if j + kl < i || j > i + ku {
                return Err(Error::Inconsistent(format!("entry ({i}, {j}) outside the band")));
            }
            *m.at_mut(i, j) += v;
        }
        m.eliminate()?;
        Ok(m)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.w + (j + self.kl - i)
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.idx(i, j)]
    }

    fn eliminate(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return Err(Error::Singular("zero matrix".into()));
        }
        for c in 0..n {
            let last = (c + kl).min(n - 1);
            let p = (c..=last).max_by(|&a, &b| self.get(a, c).norm().total_cmp(&self.get(b, c).norm())).unwrap_or(c);
            self.piv[c] = p;
            let right = (c + ku + kl).min(n - 1);
            if p != c {
                for j in c..=right {
                    let (a, b) = (self.idx(c, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let mut pivot = self.get(c, c);
            if pivot.norm() == 0.0 {
                pivot = Complex64::new(f64::EPSILON * scale, 0.0);
                *self.at_mut(c, c) = pivot;
            }
            for r in (c + 1)..=last {
                let f = self.get(r, c) / pivot;
                if f.norm() == 0.0 {
                    continue;
                }
                *self.at_mut(r, c) = f;
                for j in (c + 1)..=right {
                    let u = self.get(c, j);
                    *self.at_mut(r, j) -= f * u;
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for c in 0..n {
            let p = self.piv[c];
            if p != c {
                b.swap(c, p);
            }
            let last = (c + kl).min(n - 1);
            for r in (c + 1)..=last {
                let f = self.get(r, c);
                let bc = b[c];
                b[r] -= f * bc;
            }
        }
        for i in (0..n).rev() {
            let right = (i + ku + kl).min(n - 1);
            let mut s = b[i];
            for j in (i + 1)..=right {
                s -= self.get(i, j) * b[j];
            }
            b[i] = s / self.get(i, i);
        }
    }

    /// Smallest pivot modulus relative to the largest, a cheap
    /// conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let piv: Vec<f64> = (0..self.n).map(|i| self.get(i, i).norm()).collect();
        let max = piv.iter().fold(0.0_f64, |m, &v| m.max(v));
        let min = piv.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        min / max
    }
}

/// Eigenpair of a real symmetric sparse matrix with the given zero-based
/// index in ascending order: bisection on the banded inertia, then
/// inverse iteration with a banded LU solve.
pub fn eigenpair(a: &Csr, index: usize, tol: f64) -> Result<(f64, Vec<f64>)> {
    let perm = rcm_order(&pattern(a));
    let band = SymBand::from_csr(a, &perm);
    let e = band.eigenvalue(index, tol);
    let inv = invert(&perm);
    let k = band.k;
    let mut entries = Vec::with_capacity(a.nnz() + a.n);
    for r in 0..a.n {
        for (c, v) in a.row(r) {
            entries.push((inv[r], inv[c], Complex64::new(v, 0.0)));
        }
        entries.push((inv[r], inv[r], Complex64::new(-e, 0.0)));
    }
    let lu = ComplexBandLu::factor(a.n, k, k, &entries)?;
    let mut x: Vec<Complex64> = (0..a.n).map(|i| Complex64::new(1.0 + 0.01 * ((i % 7) as f64), 0.0)).collect();
    for _ in 0..4 {
        lu.solve(&mut x);
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Singular("inverse iteration broke down".into()));
        }
        x.iter_mut().for_each(|z| *z /= norm);
    }
    let mut v = vec![0.0; a.n];
    for (new, &old) in perm.iter().enumerate() {
        v[old] = x[new].re;
    }
    let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    v.iter_mut().for_each(|t| *t /= norm);
    Ok((e, v))
}
