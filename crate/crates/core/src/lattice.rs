//! Tight-binding dispersion, group velocities and real-space Hamiltonians
//! in fixed excitation-number sectors.

use crate::error::{domain, Error, Result};
use crate::numerics::sparse::Csr;
use crate::par::{self, Exec};
use crate::params::{LatticeSpec, SystemParams};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt;

/// Largest sector dimension [`build_hamiltonian`] will assemble.
pub const MAX_DIM: usize = 20_000_000;

/// Photon dispersion `ω(k) = −2J cos k`.
pub fn dispersion(k: f64, p: &SystemParams) -> f64 {
    -2.0 * p.j * k.cos()
}

/// Group velocity `sqrt(4J² − ω²)` inside the band.
pub fn group_velocity(omega: f64, p: &SystemParams) -> Result<f64> {
    let edge = 2.0 * p.j;
    if omega.abs() > edge {
        return Err(domain("omega", format!("|{omega}| exceeds the band edge {edge}")));
    }
    Ok((edge * edge - omega * omega).max(0.0).sqrt())
}

/// Generalised group velocity `sqrt(4J² − (ω + iγ_c/2)²)`.
///
/// Principal branch, which has positive real part in the band and
/// reduces to [`group_velocity`] for `γ_c → 0`. For `γ_c = 0` outside
/// the band the result is `−i sgn(ω) sqrt(ω² − 4J²)`, the limit taken
/// from `γ_c → 0⁺`.
pub fn complex_group_velocity(omega: f64, p: &SystemParams) -> Complex64 {
    let edge = 2.0 * p.j;
    if p.gamma_c == 0.0 {
        let r = edge * edge - omega * omega;
        return if r >= 0.0 {
            Complex64::new(r.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, -omega.signum() * (-r).sqrt())
        };
    }
    let z = Complex64::new(omega, 0.5 * p.gamma_c);
    (Complex64::new(edge * edge, 0.0) - z * z).sqrt()
}

/// A basis state: atomic excitation bitmask plus the sorted list of
/// photon sites (a multiset; repeated sites are multiple photons).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub atoms: u128,
    pub photons: Vec<u32>,
}

impl BasisState {
    pub fn n_photons(&self) -> usize {
        self.photons.len()
    }

    /// Photon occupation of site `x`.
    pub fn occupation(&self, x: u32) -> usize {
        self.photons.iter().filter(|&&s| s == x).count()
    }

    fn key(&self) -> (usize, u128, &[u32]) {
        (self.photons.len(), self.atoms, &self.photons)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "atoms={:#b} photons=[", self.atoms)?;
        for (i, s) in self.photons.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

/// Dimension of the `n_excitations` sector, or `None` on overflow.
pub fn sector_dimension(n_sites: usize, n_atoms: usize, n_excitations: usize) -> Option<u128> {
    let mut total: u128 = 0;
    for n_ph in 0..=n_excitations {
        let n_at = n_excitations - n_ph;
        if n_at > n_atoms {
            continue;
        }
        let a = binomial(n_atoms as u128, n_at as u128)?;
        let p = if n_ph == 0 { 1 } else { binomial((n_sites + n_ph - 1) as u128, n_ph as u128)? };
        total = total.checked_add(a.checked_mul(p)?)?;
    }
    Some(total)
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

/// Sector basis in the persisted order: photon number ascending, then
/// atomic bitmask ascending, then photon site list lexicographically.
pub fn enumerate_basis(n_sites: usize, n_atoms: usize, n_excitations: usize) -> Result<Vec<BasisState>> {
    let dim = sector_dimension(n_sites, n_atoms, n_excitations).unwrap_or(u128::MAX);
    if dim > MAX_DIM as u128 {
        return Err(Error::Capacity { required: dim, limit: MAX_DIM });
    }
    let mut out = Vec::with_capacity(dim as usize);
    for n_ph in 0..=n_excitations {
        let n_at = n_excitations - n_ph;
        if n_at > n_atoms {
            continue;
        }
        let masks = masks_with_popcount(n_atoms, n_at);
        let lists = multisets(n_sites as u32, n_ph);
        for &m in &masks {
            for l in &lists {
                out.push(BasisState { atoms: m, photons: l.clone() });
            }
        }
    }
    debug_assert!(out.windows(2).all(|w| w[0].key() < w[1].key()));
    Ok(out)
}

fn masks_with_popcount(n: usize, k: usize) -> Vec<u128> {
    if k == 0 {
        return vec![0];
    }
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut m: u128 = u128::MAX >> (128 - k);
    while (128 - m.leading_zeros()) as usize <= n {
        out.push(m);
        let c = m & m.wrapping_neg();
        let r = m.wrapping_add(c);
        if r == 0 {
            break;
        }
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

fn multisets(n: u32, k: usize) -> Vec<Vec<u32>> {
    fn rec(n: u32, k: usize, from: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for s in from..n {
            cur.push(s);
            rec(n, k, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Sparse Hamiltonian of one excitation sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    pub dimension: usize,
    /// `(row, col, value)`, sorted by row then column, no duplicates.
    pub entries: Vec<(usize, usize, Complex64)>,
    /// Basis labels; empty when read back from the coordinate format.
    pub basis: Vec<BasisState>,
}

impl SparseHamiltonian {
    pub fn from_entries(dimension: usize, mut entries: Vec<(usize, usize, Complex64)>, basis: Vec<BasisState>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (e.0, e.1) => last.2 += e.2,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.2 != Complex64::new(0.0, 0.0));
        Self { dimension, entries: merged, basis }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(r, c)))
            .map_or(Complex64::new(0.0, 0.0), |k| self.entries[k].2)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.2.im == 0.0)
    }

    /// Every entry has its conjugate transpose partner within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.entries.iter().all(|&(r, c, v)| (self.get(c, r).conj() - v).norm() <= tol)
    }

    /// Real CSR copy; fails if any entry has an imaginary part.
    pub fn to_csr(&self) -> Result<Csr> {
        if !self.is_real() {
            return Err(domain("hamiltonian", "complex entries (loss terms) cannot go to a real solver"));
        }
        Ok(Csr::from_triplets(self.dimension, self.entries.iter().map(|&(r, c, v)| (r, c, v.re)).collect()))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.dimension, self.dimension);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// Coordinate-list text: `dim nnz`, then `row col re im` per line.
    pub fn to_coo_string(&self) -> String {
        let mut s = format!("{} {}\n", self.dimension, self.entries.len());
        for &(r, c, v) in &self.entries {
            s.push_str(&format!("{r} {c} {:e} {:e}\n", v.re, v.im));
        }
        s
    }

    /// Parses the format written by [`SparseHamiltonian::to_coo_string`].
    pub fn from_coo_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Format("empty input".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let parse_usize =
            |s: &str, line: usize| s.parse::<usize>().map_err(|e| Error::Format(format!("line {}: {e}", line + 1)));
        if head.len() != 2 {
            return Err(Error::Format("line 1: expected `dim nnz`".into()));
        }
        let dim = parse_usize(head[0], 0)?;
        let nnz = parse_usize(head[1], 0)?;
        let mut entries = Vec::with_capacity(nnz);
        for (i, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::Format(format!("line {}: expected `row col re im`", i + 1)));
            }
            let r = parse_usize(f[0], i)?;
            let c = parse_usize(f[1], i)?;
            if r >= dim || c >= dim {
                return Err(Error::Format(format!("line {}: index outside dimension {dim}", i + 1)));
            }
            let re: f64 = f[2].parse().map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
            let im: f64 = f[3].parse().map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
            entries.push((r, c, Complex64::new(re, im)));
        }
        if entries.len() != nnz {
            return Err(Error::Format(format!("header announces {nnz} entries, found {}", entries.len())));
        }
        Ok(Self::from_entries(dim, entries, Vec::new()))
    }
}

/// Assembles the Hamiltonian of the `n_excitations` sector.
///
/// Hopping `−J` with bosonic factors, `δ` per excited atom, `g·sqrt(n+1)`
/// atom-photon exchange at the atom sites, and with `include_loss` the
/// non-Hermitian terms `−iγ_a/2` per excited atom and `−iγ_c/2` per photon.
pub fn build_hamiltonian(
    p: &SystemParams,
    lattice: &LatticeSpec,
    n_excitations: usize,
    include_loss: bool,
) -> Result<SparseHamiltonian> {
    build_hamiltonian_with(p, lattice, n_excitations, include_loss, Exec::default())
}

pub fn build_hamiltonian_with(
    p: &SystemParams,
    lattice: &LatticeSpec,
    n_excitations: usize,
    include_loss: bool,
    exec: Exec,
) -> Result<SparseHamiltonian> {
    p.validate()?;
    lattice.validate()?;
    if n_excitations == 0 {
        return Err(Error::InvalidParam { name: "n_excitations", reason: "must be at least 1".into() });
    }
    let basis = enumerate_basis(lattice.n_sites, lattice.n_atoms(), n_excitations)?;
    let index: HashMap<&BasisState, usize> = basis.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let neighbours = lattice.neighbours();
    let atoms = &lattice.atom_positions;

    let columns = par::map_range(exec, basis.len(), |col| {
        let s = &basis[col];
        let mut out: Vec<(usize, usize, Complex64)> = Vec::new();
        let n_exc = s.atoms.count_ones() as f64;
        let mut diag = Complex64::new(p.delta * n_exc, 0.0);
        if include_loss {
            diag -= Complex64::new(0.0, 0.5 * (p.gamma_a * n_exc + p.gamma_c * s.n_photons() as f64));
        }
        if diag != Complex64::new(0.0, 0.0) {
            out.push((col, col, diag));
        }
        let mut sites = s.photons.clone();
        sites.dedup();
        for &x in &sites {
            let nx = s.occupation(x) as f64;
            for &y in &neighbours[x as usize] {
                let ny = s.occupation(y as u32) as f64;
                let mut t = s.photons.clone();
                let k = t.iter().position(|&v| v == x).unwrap();
                t.remove(k);
                t.push(y as u32);
                t.sort_unstable();
                let target = BasisState { atoms: s.atoms, photons: t };
                let row = index[&target];
                out.push((row, col, Complex64::new(-p.j * nx.sqrt() * (ny + 1.0).sqrt(), 0.0)));
            }
        }
        for (a, &xa) in atoms.iter().enumerate() {
            let bit = 1u128 << a;
            let n = s.occupation(xa as u32) as f64;
            if s.atoms & bit != 0 {
                let mut t = s.photons.clone();
                t.push(xa as u32);
                t.sort_unstable();
                let row = index[&BasisState { atoms: s.atoms & !bit, photons: t }];
                out.push((row, col, Complex64::new(p.g * (n + 1.0).sqrt(), 0.0)));
            } else if n > 0.0 {
                let mut t = s.photons.clone();
                let k = t.iter().position(|&v| v == xa as u32).unwrap();
                t.remove(k);
                let row = index[&BasisState { atoms: s.atoms | bit, photons: t }];
                out.push((row, col, Complex64::new(p.g * n.sqrt(), 0.0)));
            }
        }
        out
    });
    let entries: Vec<_> = columns.into_iter().flatten().collect();
    drop(index);
    Ok(SparseHamiltonian::from_entries(basis.len(), entries, basis))
}
