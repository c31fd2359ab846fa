//! Born-Markov (weak-coupling) collective decay rates and coherent
//! dipole-dipole couplings mediated by the waveguide.

use crate::error::{domain, Error, Result};
use crate::lattice::{complex_group_velocity, BasisState, SparseHamiltonian};
use crate::numerics::bessel::bessel_j;
use crate::numerics::quad;
use crate::params::{LatticeSpec, SystemParams};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Kernel, rates and couplings for a set of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub a: DMatrix<Complex64>,
    pub gamma: DMatrix<f64>,
    pub u: DMatrix<f64>,
    /// Effective complex wavenumber at the atomic frequency.
    pub k: Complex64,
    /// Generalised group velocity at the atomic frequency.
    pub v_tilde: Complex64,
}

impl CouplingMatrix {
    /// `i,j,gamma_ij,u_ij` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,gamma_ij,u_ij\n");
        for i in 0..self.gamma.nrows() {
            for j in 0..self.gamma.ncols() {
                s.push_str(&format!("{i},{j},{:e},{:e}\n", self.gamma[(i, j)], self.u[(i, j)]));
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovDiagnostics {
    /// `g / |ṽ(δ)|`.
    pub single_atom_ratio: f64,
    /// `g·sqrt(span) / |ṽ(δ)|` with `span` the distance between the
    /// outermost atoms.
    pub retardation_ratio: f64,
    pub threshold: f64,
    pub valid: bool,
}

pub const DEFAULT_THRESHOLD: f64 = 0.1;

fn check_kernel_domain(p: &SystemParams) -> Result<()> {
    p.validate()?;
    if p.j == 0.0 {
        return Err(domain("J", "the waveguide kernel needs J > 0"));
    }
    if p.gamma_c == 0.0 && p.delta.abs() == 2.0 * p.j {
        return Err(Error::Singular(format!("lossless band edge δ = {}: ṽ = 0", p.delta)));
    }
    Ok(())
}

/// `e^{iK} = (iṽ − δ − iγ_c/2)/(2J)`, with `|e^{iK}| ≤ 1`.
fn phase_factor(p: &SystemParams, v: Complex64) -> Complex64 {
    let z = Complex64::new(p.delta, 0.5 * p.gamma_c);
    (Complex64::i() * v - z) / (2.0 * p.j)
}

/// Effective wavenumber `K = π − arccos((δ + iγ_c/2)/2J)`.
pub fn wavenumber(p: &SystemParams) -> Result<Complex64> {
    check_kernel_domain(p)?;
    let v = complex_group_velocity(p.delta, p);
    Ok(-Complex64::i() * phase_factor(p, v).ln())
}

/// Closed-form kernel `A(d) = g² e^{iKd} / ṽ(δ)`.
pub fn coupling_kernel(p: &SystemParams, d: usize) -> Result<Complex64> {
    if p.g == 0.0 {
        p.validate()?;
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_kernel_domain(p)?;
    let v = complex_group_velocity(p.delta, p);
    let q = phase_factor(p, v);
    Ok(p.g * p.g / v * q.powi(d as i32))
}

/// Time-domain waveguide correlation `i^{|z|} J_{|z|}(2Jτ)`.
pub fn kernel_time_domain(z: i64, tau: f64, p: &SystemParams) -> Complex64 {
    let n = z.unsigned_abs() as u32;
    Complex64::i().powu(n) * bessel_j(n, 2.0 * p.j * tau)
}

/// `g² ∫₀^∞ Φ(d, τ) e^{(iδ − γ_c/2)τ} dτ` by adaptive quadrature; the
/// independent check on [`coupling_kernel`]. Needs `γ_c > 0`.
pub fn kernel_by_quadrature(p: &SystemParams, d: usize) -> Result<Complex64> {
    p.validate()?;
    if p.gamma_c <= 0.0 {
        return Err(domain("gamma_c", "the time integral converges only for gamma_c > 0"));
    }
    let g2 = p.g * p.g;
    let scale = g2 / p.j.max(p.gamma_c);
    let f = |t: f64| kernel_time_domain(d as i64, t, p) * Complex64::new(-0.5 * p.gamma_c * t, p.delta * t).exp() * g2;
    // Landau: |J_n(x)| ≤ 0.675 x^{-1/3}.
    let tail = |t: f64| g2 * 0.675 * (2.0 * p.j * t).powf(-1.0 / 3.0) * 2.0 / p.gamma_c * (-0.5 * p.gamma_c * t).exp();
    let panel = 2.0_f64.min(4.0 / (2.0 * p.j + p.delta.abs()));
    Ok(quad::integrate_to_infinity(&f, panel, 1e-15 * scale, tail, 1e-13 * scale))
}

/// Rates and couplings for every atom pair of `lattice`.
pub fn rate_matrices(p: &SystemParams, lattice: &LatticeSpec) -> Result<CouplingMatrix> {
    lattice.validate()?;
    check_kernel_domain(p)?;
    let n = lattice.n_atoms();
    let x = &lattice.atom_positions;
    let mut a = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = coupling_kernel(p, lattice.distance(x[i], x[j]))?;
        }
    }
    let gamma = DMatrix::from_fn(n, n, |i, j| 2.0 * a[(i, j)].re + if i == j { p.gamma_a } else { 0.0 });
    let u = DMatrix::from_fn(n, n, |i, j| 2.0 * a[(i, j)].im);
    Ok(CouplingMatrix { a, gamma, u, k: wavenumber(p)?, v_tilde: complex_group_velocity(p.delta, p) })
}

/// Single-excitation atomic Hamiltonian: `δ` on the diagonal and the
/// flip-flop couplings `U_ij/2` off the diagonal.
pub fn effective_atomic_hamiltonian(cm: &CouplingMatrix, p: &SystemParams) -> SparseHamiltonian {
    let n = cm.u.nrows();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j { p.delta } else { 0.5 * cm.u[(i, j)] };
            entries.push((i, j, Complex64::new(v, 0.0)));
        }
    }
    let basis = (0..n).map(|i| BasisState { atoms: 1 << i, photons: vec![] }).collect();
    SparseHamiltonian::from_entries(n, entries, basis)
}

/// Born-Markov validity ratios against `threshold` (default 0.1).
pub fn markov_validity(p: &SystemParams, lattice: &LatticeSpec, threshold: f64) -> MarkovDiagnostics {
    let v = complex_group_velocity(p.delta, p).norm();
    let span = match (lattice.atom_positions.first(), lattice.atom_positions.last()) {
        (Some(a), Some(b)) => (b - a) as f64,
        _ => 0.0,
    };
    let ratio = |num: f64| {
        if num == 0.0 {
            0.0
        } else if v == 0.0 {
            f64::INFINITY
        } else {
            num / v
        }
    };
    let single = ratio(p.g);
    let retard = ratio(p.g * span.sqrt());
    MarkovDiagnostics {
        single_atom_ratio: single,
        retardation_ratio: retard,
        threshold,
        valid: single < threshold && retard < threshold,
    }
}
