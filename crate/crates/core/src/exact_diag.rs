//! Exact diagonalisation of the lossless Hamiltonian in fixed
//! excitation sectors, plus tools to read the resulting spectra and
//! wavefunctions.

use crate::error::{domain, Error, Result};
use crate::lattice::{build_hamiltonian_with, BasisState};
use crate::numerics::sparse::Csr;
use crate::numerics::{banded, lanczos};
use crate::par::Exec;
use crate::params::{Boundary, Branch, LatticeSpec, SystemParams};
use crate::single_photon::solve_bound_energies;
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Largest sector solved with a dense symmetric eigensolver.
pub const DENSE_LIMIT: usize = 400;
/// Largest sector [`full_spectrum`] accepts.
pub const FULL_SPECTRUM_LIMIT: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dense,
    /// Banded inertia bisection plus inverse iteration (one excitation).
    Banded,
    Lanczos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorEigenpair {
    pub energy: f64,
    pub vector: Vec<f64>,
    /// `‖Hv − Ev‖`.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SectorSolution {
    pub basis: Vec<BasisState>,
    /// Ascending.
    pub lowest: Vec<SectorEigenpair>,
    /// Descending.
    pub highest: Vec<SectorEigenpair>,
    pub method: Method,
}

fn lossless_matrix(p: &SystemParams, lattice: &LatticeSpec, ne: usize, exec: Exec) -> Result<(Csr, Vec<BasisState>)> {
    if !p.is_lossless() {
        return Err(domain("gamma", "exact diagonalisation needs γ_a = γ_c = 0"));
    }
    if !(1..=3).contains(&ne) {
        return Err(Error::InvalidParam { name: "n_excitations", reason: format!("must be 1, 2 or 3, got {ne}") });
    }
    let h = build_hamiltonian_with(p, lattice, ne, false, exec)?;
    let csr = h.to_csr()?;
    Ok((csr, h.basis))
}

pub fn diagonalize_sector(p: &SystemParams, lattice: &LatticeSpec, ne: usize, k: usize) -> Result<SectorSolution> {
    diagonalize_sector_with(p, lattice, ne, k, Exec::default())
}

/// The `k` lowest and `k` highest eigenpairs of the sector Hamiltonian.
pub fn diagonalize_sector_with(
    p: &SystemParams,
    lattice: &LatticeSpec,
    ne: usize,
    k: usize,
    exec: Exec,
) -> Result<SectorSolution> {
    let (a, basis) = lossless_matrix(p, lattice, ne, exec)?;
    let n = a.n;
    let k = k.clamp(1, n);
    let residual = |e: f64, v: &[f64]| {
        let mut y = vec![0.0; n];
        a.matvec(exec, v, &mut y);
        y.iter().zip(v).map(|(y, v)| (y - e * v).powi(2)).sum::<f64>().sqrt()
    };
    let pair = |energy: f64, vector: Vec<f64>| SectorEigenpair { energy, residual: residual(energy, &vector), vector };
    let (lowest, highest, method) = if n <= DENSE_LIMIT {
        let (w, v) = dense_eigen(a.to_dense());
        let col = |i: usize| v.column(i).iter().copied().collect::<Vec<f64>>();
        let lo = (0..k).map(|i| pair(w[i], col(i))).collect();
        let hi = (0..k).map(|i| pair(w[n - 1 - i], col(n - 1 - i))).collect();
        (lo, hi, Method::Dense)
    } else if ne == 1 {
        let tol = 1e-14 * a.norm_inf().max(1.0);
        let mut lo = Vec::with_capacity(k);
        let mut hi = Vec::with_capacity(k);
        for i in 0..k {
            let (e, v) = banded::eigenpair(&a, i, tol)?;
            lo.push(pair(e, v));
            let (e, v) = banded::eigenpair(&a, n - 1 - i, tol)?;
            hi.push(pair(e, v));
        }
        (lo, hi, Method::Banded)
    } else {
        let opts = lanczos::Options { exec, ..Default::default() };
        let apply = |x: &[f64], y: &mut [f64]| a.matvec(exec, x, y);
        let run = |which| -> Result<Vec<SectorEigenpair>> {
            Ok(lanczos::extremal(n, apply, k, which, opts)?
                .into_iter()
                .map(|e| SectorEigenpair { energy: e.value, vector: e.vector, residual: e.residual })
                .collect())
        };
        (run(lanczos::Which::Lowest)?, run(lanczos::Which::Highest)?, Method::Lanczos)
    };
    Ok(SectorSolution { basis, lowest, highest, method })
}

/// Every eigenvalue of a sector small enough for a dense solve, ascending.
pub fn full_spectrum(p: &SystemParams, lattice: &LatticeSpec, ne: usize) -> Result<Vec<f64>> {
    full_eigensystem(p, lattice, ne).map(|(w, _, _)| w)
}

/// Eigenvalues (ascending), eigenvectors as columns, and the basis.
pub fn full_eigensystem(
    p: &SystemParams,
    lattice: &LatticeSpec,
    ne: usize,
) -> Result<(Vec<f64>, DMatrix<f64>, Vec<BasisState>)> {
    let (a, basis) = lossless_matrix(p, lattice, ne, Exec::default())?;
    if a.n > FULL_SPECTRUM_LIMIT {
        return Err(Error::Capacity { required: a.n as u128, limit: FULL_SPECTRUM_LIMIT });
    }
    let (w, v) = dense_eigen(a.to_dense());
    Ok((w, v, basis))
}

fn dense_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let w = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let v = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (w, v)
}

/// Index map of the spatial reflection that leaves the atoms in place:
/// `x → 2a − x (mod N)` about the first atom on a ring, `x → N − 1 − x`
/// on an open chain.
pub fn reflection_map(lattice: &LatticeSpec, basis: &[BasisState]) -> Result<Vec<usize>> {
    let n = lattice.n_sites;
    let reflect = |x: usize| -> usize {
        match lattice.boundary {
            Boundary::Periodic => (2 * lattice.atom_positions.first().copied().unwrap_or(0) + 2 * n - x) % n,
            Boundary::Open => n - 1 - x,
        }
    };
    let atoms: Vec<usize> = lattice.atom_positions.iter().map(|&x| reflect(x)).collect();
    let mut atom_map = vec![0usize; atoms.len()];
    for (i, x) in atoms.iter().enumerate() {
        atom_map[i] = lattice
            .atom_positions
            .iter()
            .position(|y| y == x)
            .ok_or_else(|| domain("lattice", "atom positions are not mirror symmetric"))?;
    }
    let index: HashMap<&BasisState, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    basis
        .iter()
        .map(|b| {
            let mut mask = 0u128;
            for (i, &j) in atom_map.iter().enumerate() {
                if b.atoms >> i & 1 == 1 {
                    mask |= 1 << j;
                }
            }
            let mut photons: Vec<u32> = b.photons.iter().map(|&x| reflect(x as usize) as u32).collect();
            photons.sort_unstable();
            let image = BasisState { atoms: mask, photons };
            index.get(&image).copied().ok_or_else(|| Error::Inconsistent(format!("reflected state {image} missing")))
        })
        .collect()
}

/// `⟨v|R|v⟩` for the reflection `R`; ±1 for states of definite parity.
pub fn mirror_parity(reflection: &[usize], v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(i, x)| x * v[reflection[i]]).sum()
}

/// Two-excitation eigenstate of a single atom split into the atomic part
/// `b(x)` and the symmetric two-photon amplitude `u(x, y)`, normalised as
/// `Σ|b|² + Σ_{x,y}|u|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonSolution {
    pub energy: f64,
    pub lattice: LatticeSpec,
    pub b: Vec<f64>,
    /// Row-major `n_sites × n_sites`.
    pub u: Vec<f64>,
}

impl TwoPhotonSolution {
    pub fn from_eigenvector(lattice: &LatticeSpec, basis: &[BasisState], energy: f64, v: &[f64]) -> Result<Self> {
        if lattice.n_atoms() != 1 {
            return Err(domain("lattice", "two-photon amplitudes need exactly one atom"));
        }
        let n = lattice.n_sites;
        let mut b = vec![0.0; n];
        let mut u = vec![0.0; n * n];
        for (state, &c) in basis.iter().zip(v) {
            match (state.atoms, state.photons.as_slice()) {
                (1, [x]) => b[*x as usize] = c,
                (0, [x, y]) if x == y => u[*x as usize * n + *x as usize] = c,
                (0, [x, y]) => {
                    let (x, y) = (*x as usize, *y as usize);
                    u[x * n + y] = c / std::f64::consts::SQRT_2;
                    u[y * n + x] = c / std::f64::consts::SQRT_2;
                }
                _ => return Err(Error::Inconsistent(format!("state {state} outside the two-excitation sector"))),
            }
        }
        Ok(Self { energy, lattice: lattice.clone(), b, u })
    }

    pub fn u(&self, x: usize, y: usize) -> f64 {
        self.u[x * self.lattice.n_sites + y]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.b.iter().chain(&self.u).map(|c| c * c).sum()
    }

    /// Largest residual of the coupled amplitude equations
    /// `E u = −J Σ_nn u + (g/√2)[b(x)δ_{ay} + b(y)δ_{ax}]` and
    /// `E b = δ b − J Σ_nn b + √2 g u(a, x)`.
    pub fn amplitude_residual(&self, p: &SystemParams) -> f64 {
        let n = self.lattice.n_sites;
        let a = self.lattice.atom_positions[0];
        let nb = self.lattice.neighbours();
        let e = self.energy;
        let c = p.g / std::f64::consts::SQRT_2;
        let mut worst = 0.0_f64;
        for x in 0..n {
            for y in 0..n {
                let hop: f64 = nb[x].iter().map(|&x2| self.u(x2, y)).sum::<f64>()
                    + nb[y].iter().map(|&y2| self.u(x, y2)).sum::<f64>();
                let mut rhs = -p.j * hop;
                if y == a {
                    rhs += c * self.b[x];
                }
                if x == a {
                    rhs += c * self.b[y];
                }
                worst = worst.max((e * self.u(x, y) - rhs).abs());
            }
            let hop: f64 = nb[x].iter().map(|&x2| self.b[x2]).sum();
            let rhs = p.delta * self.b[x] - p.j * hop + 2.0 * c * self.u(a, x);
            worst = worst.max((e * self.b[x] - rhs).abs());
        }
        worst
    }

    /// `|u(a, a + d)|` for `d = 0..` up to a quarter of the ring (or half
    /// the distance to the nearer open end), clear of finite-size images.
    pub fn tail_profile(&self) -> Vec<f64> {
        let n = self.lattice.n_sites;
        let a = self.lattice.atom_positions[0];
        let reach = match self.lattice.boundary {
            Boundary::Periodic => n / 4,
            Boundary::Open => (n - 1 - a).min(a) / 2,
        };
        (0..=reach).map(|d| self.u(a, (a + d) % n).abs()).collect()
    }

    /// `x,y,u` rows for plotting.
    pub fn to_grid_csv(&self) -> String {
        let n = self.lattice.n_sites;
        let mut s = String::from("x,y,u\n");
        for x in 0..n {
            for y in 0..n {
                s.push_str(&format!("{x},{y},{:e}\n", self.u(x, y)));
            }
        }
        s
    }
}

/// Exponential tail fit `|ψ(d)| ∝ e^{−d/λ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub lambda: f64,
    /// RMS deviation of `ln|ψ|` from the fitted line.
    pub residual: f64,
    pub window: (usize, usize),
}

/// Amplitudes below this are treated as numerical noise.
pub const TAIL_FLOOR: f64 = 1e-12;

/// Least-squares slope of `ln|ψ(d)|` over the outer half of the usable
/// range (`d` up to the last point above [`TAIL_FLOOR`]).
pub fn fit_decay_length(profile: &[f64]) -> Result<DecayFit> {
    let end = profile.iter().rposition(|v| v.abs() > TAIL_FLOOR).unwrap_or(0);
    let start = (end / 2).max(1);
    if end < start + 7 {
        return Err(Error::InsufficientRange(format!(
            "only {} tail points above {TAIL_FLOOR:e}, need 8",
            end.saturating_sub(start) + 1
        )));
    }
    let pts: Vec<(f64, f64)> = (start..=end).map(|d| (d as f64, profile[d].abs().ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    if slope >= 0.0 {
        return Err(Error::InsufficientRange("profile does not decay over the tail window".into()));
    }
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|(x, y)| (y - icpt - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    Ok(DecayFit { lambda: -1.0 / slope, residual, window: (start, end) })
}

/// Tail decay length of a two-photon bound state.
pub fn extract_decay_length(sol: &TwoPhotonSolution) -> Result<DecayFit> {
    fit_decay_length(&sol.tail_profile())
}

/// Where a two-excitation eigenvalue sits relative to the continuum
/// `[−4J, 4J]` and the bound-plus-free bands `[E_± − 2J, E_± + 2J]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralTag {
    Scattering,
    BoundPlusFreeUpper,
    BoundPlusFreeLower,
    /// Inside both a bound-plus-free band and the continuum.
    Overlap,
    TrueBoundUpper,
    TrueBoundLower,
    /// Within the margin of a region it does not belong to.
    Ambiguous,
}

impl SpectralTag {
    pub fn name(self) -> &'static str {
        match self {
            SpectralTag::Scattering => "scattering",
            SpectralTag::BoundPlusFreeUpper => "bound_plus_free_upper",
            SpectralTag::BoundPlusFreeLower => "bound_plus_free_lower",
            SpectralTag::Overlap => "overlap",
            SpectralTag::TrueBoundUpper => "true_bound_upper",
            SpectralTag::TrueBoundLower => "true_bound_lower",
            SpectralTag::Ambiguous => "ambiguous",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandClassification {
    pub continuum: (f64, f64),
    pub bands: Vec<(Branch, f64, f64)>,
    /// Parts of the bound-plus-free bands that overlap the continuum.
    pub overlap_regions: Vec<(Branch, f64, f64)>,
    /// A bound-plus-free state can convert into two free photons at the
    /// same energy.
    pub escape_allowed: bool,
    pub margin: f64,
    /// One tag per input energy.
    pub tags: Vec<SpectralTag>,
    pub isolated: Vec<f64>,
}

/// Assigns sorted two-excitation energies to spectral regions with a
/// margin of three mean level spacings.
pub fn classify_two_excitation(energies: &[f64], p: &SystemParams) -> Result<BandClassification> {
    let margin = match energies.len() {
        0 | 1 => 0.0,
        n => 3.0 * (energies[n - 1] - energies[0]) / (n - 1) as f64,
    };
    classify_with_margin(energies, p, margin)
}

/// As [`classify_two_excitation`] with an explicit margin, for when only
/// part of the spectrum is known.
pub fn classify_with_margin(energies: &[f64], p: &SystemParams, margin: f64) -> Result<BandClassification> {
    let tj = 2.0 * p.j;
    let continuum = (-2.0 * tj, 2.0 * tj);
    let (up, lo) = solve_bound_energies(p)?;
    let bands = vec![(Branch::Lower, lo.energy - tj, lo.energy + tj), (Branch::Upper, up.energy - tj, up.energy + tj)];
    let overlap_regions: Vec<(Branch, f64, f64)> = bands
        .iter()
        .filter_map(|&(b, l, h)| {
            let (x, y) = (l.max(continuum.0), h.min(continuum.1));
            (x < y).then_some((b, x, y))
        })
        .collect();
    let regions: Vec<(Option<Branch>, f64, f64)> = std::iter::once((None, continuum.0, continuum.1))
        .chain(bands.iter().map(|&(b, l, h)| (Some(b), l, h)))
        .collect();
    let tags: Vec<SpectralTag> = energies
        .iter()
        .map(|&e| {
            let core: Vec<Option<Branch>> = regions.iter().filter(|r| e >= r.1 && e <= r.2).map(|r| r.0).collect();
            let near = regions.iter().any(|r| !(e >= r.1 && e <= r.2) && e >= r.1 - margin && e <= r.2 + margin);
            match core.as_slice() {
                [] if near => SpectralTag::Ambiguous,
                [] if e > 0.0 => SpectralTag::TrueBoundUpper,
                [] => SpectralTag::TrueBoundLower,
                _ if near => SpectralTag::Ambiguous,
                [None] => SpectralTag::Scattering,
                [Some(Branch::Lower)] => SpectralTag::BoundPlusFreeLower,
                [Some(Branch::Upper)] => SpectralTag::BoundPlusFreeUpper,
                c if c.contains(&None) => SpectralTag::Overlap,
                _ => SpectralTag::Ambiguous,
            }
        })
        .collect();
    let isolated = energies
        .iter()
        .zip(&tags)
        .filter(|(_, t)| matches!(t, SpectralTag::TrueBoundUpper | SpectralTag::TrueBoundLower))
        .map(|(e, _)| *e)
        .collect();
    Ok(BandClassification {
        continuum,
        bands,
        escape_allowed: !overlap_regions.is_empty(),
        overlap_regions,
        margin,
        tags,
        isolated,
    })
}
