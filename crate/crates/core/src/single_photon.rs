//! One atom, one excitation: dressed bound states outside the band, the
//! driven excitation spectrum with its poles, and the strong-coupling
//! thresholds.

use crate::error::{domain, Error, Result};
use crate::lattice::{build_hamiltonian, complex_group_velocity};
use crate::numerics::banded::{invert, rcm_order, ComplexBandLu};
use crate::numerics::{poly, roots};
use crate::par::{self, Exec};
use crate::params::{Branch, LatticeSpec, SystemParams};
use num_complex::Complex64;

/// Dressed single-excitation bound state of one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState1 {
    pub branch: Branch,
    pub energy: f64,
    /// Photon localisation length in sites (0 without tunnelling).
    pub lambda: f64,
    /// Mixing angle in `[0, π/2]`; `cos θ` is the atomic amplitude.
    pub theta: f64,
    pub atom_amplitude: f64,
    /// Photon amplitude on the atom's own site.
    pub photon_amplitude0: f64,
    params: SystemParams,
}

impl BoundState1 {
    /// Photon amplitude at signed distance `d` from the atom.
    pub fn photon_amplitude(&self, d: i64) -> f64 {
        if self.lambda == 0.0 {
            return if d == 0 { self.photon_amplitude0 } else { 0.0 };
        }
        let alt = match self.branch {
            Branch::Upper if d % 2 != 0 => -1.0,
            _ => 1.0,
        };
        alt * self.photon_amplitude0 * (-(d.unsigned_abs() as f64) / self.lambda).exp()
    }

    /// Amplitudes for `d = −max_d..=max_d`.
    pub fn profile(&self, max_d: usize) -> Vec<f64> {
        let m = max_d as i64;
        (-m..=m).map(|d| self.photon_amplitude(d)).collect()
    }

    /// `|E − δ − Σ(E)|` for the pole condition of the photon propagator.
    /// `sqrt(E² − 4J²)` is taken as `2J sinh(1/λ)`, which stays accurate
    /// next to the band edge where `E² − 4J²` cancels.
    pub fn residual(&self) -> f64 {
        let p = &self.params;
        let e = self.energy;
        let root = if self.lambda == 0.0 { e.abs() } else { 2.0 * p.j * (1.0 / self.lambda).sinh() };
        (e - p.delta - e.signum() * p.g * p.g / root).abs()
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }
}

/// Upper and lower bound states.
pub fn solve_bound_energies(p: &SystemParams) -> Result<(BoundState1, BoundState1)> {
    p.validate()?;
    if p.g <= 0.0 {
        return Err(Error::InvalidParam { name: "g", reason: "bound states need g > 0".into() });
    }
    if p.j == 0.0 {
        return Ok(jaynes_cummings(p));
    }
    Ok((solve_branch(p, Branch::Upper)?, solve_branch(p, Branch::Lower)?))
}

fn jaynes_cummings(p: &SystemParams) -> (BoundState1, BoundState1) {
    let root = (p.delta * p.delta + 4.0 * p.g * p.g).sqrt();
    let make = |branch: Branch| {
        let e = 0.5 * p.delta + 0.5 * branch.sign() * root;
        let b = (e * e / (e * e + p.g * p.g)).sqrt();
        BoundState1 {
            branch,
            energy: e,
            lambda: 0.0,
            theta: b.clamp(0.0, 1.0).acos(),
            atom_amplitude: b,
            photon_amplitude0: p.g * b / e,
            params: *p,
        }
    };
    (make(Branch::Upper), make(Branch::Lower))
}

/// Solves in `u = 1/λ`, where `E = ±2J cosh u` and the condition
/// `2J cosh u ∓ δ − g²/(2J sinh u) = 0` is increasing in `u`.
fn solve_branch(p: &SystemParams, branch: Branch) -> Result<BoundState1> {
    let s = branch.sign();
    let tj = 2.0 * p.j;
    let g2 = p.g * p.g;
    let f = |u: f64| {
        let (sh, ch) = (u.sinh(), u.cosh());
        (tj * ch - s * p.delta - g2 / (tj * sh), tj * sh + g2 * ch / (tj * sh * sh))
    };
    let e_hi = (tj + 2.0 * p.g + p.delta.abs()).max(2.0 * tj);
    let u_hi = (e_hi / tj).acosh();
    let mut u_lo = 1e-3 * u_hi;
    while f(u_lo).0 >= 0.0 {
        u_lo *= 0.5;
        if u_lo < 1e-300 {
            return Err(Error::Inconsistent("no bracket for the bound-state condition".into()));
        }
    }
    let u = roots::bisect_newton(f, u_lo, u_hi, 1e-16)?;
    let (sh, ch) = (u.sinh(), u.cosh());
    let cos2 = 1.0 / (1.0 + g2 * ch / (tj * tj * sh * sh * sh));
    let b = cos2.sqrt();
    Ok(BoundState1 {
        branch,
        energy: s * tj * ch,
        lambda: 1.0 / u,
        theta: b.clamp(0.0, 1.0).acos(),
        atom_amplitude: b,
        photon_amplitude0: s * p.g * b / (tj * sh),
        params: *p,
    })
}

/// `cos²θ`, the atomic excitation probability of a bound state.
pub fn atomic_population(bs: &BoundState1) -> f64 {
    bs.atom_amplitude * bs.atom_amplitude
}

/// Checks `λ₋(δ) = λ₊(−δ)` and `θ₋(δ) = θ₊(−δ)` to 1e-10.
pub fn mirror_identities_check(p: &SystemParams) -> bool {
    let (Ok((_, lo)), Ok((up_m, _))) = (solve_bound_energies(p), solve_bound_energies(&p.mirrored())) else {
        return false;
    };
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0);
    rel(lo.lambda, up_m.lambda) && rel(lo.theta, up_m.theta) && rel(lo.energy, -up_m.energy)
}

/// Driven atomic spectrum on a frequency grid, with the poles of the
/// atomic propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub poles_external: Vec<Complex64>,
    pub poles_internal: Vec<Complex64>,
    pub gamma_bar: f64,
    /// False when `γ_a = 0` and the `γ_a²/4` prefactor was replaced by 1.
    pub normalized: bool,
}

/// Self-energy `−i g²/ṽ(ω)` of the atom.
pub fn self_energy(omega: f64, p: &SystemParams) -> Complex64 {
    let v = complex_group_velocity(omega, p);
    -Complex64::i() * p.g * p.g / v
}

fn spectrum_value(omega: f64, p: &SystemParams, prefactor: f64) -> f64 {
    if p.g > 0.0 && complex_group_velocity(omega, p).norm() == 0.0 {
        // Lossless band edge: the atomic response vanishes.
        return 0.0;
    }
    let den = Complex64::new(omega - p.delta, 0.5 * p.gamma_a) - self_energy(omega, p);
    prefactor / den.norm_sqr()
}

/// Coefficients (ascending) of `(ω − δ + iγ_a/2)²(4J² − (ω + iγ_c/2)²) + g⁴`.
pub fn pole_polynomial(p: &SystemParams) -> Vec<Complex64> {
    let a = Complex64::new(-p.delta, 0.5 * p.gamma_a);
    let c = Complex64::new(0.0, 0.5 * p.gamma_c);
    let one = Complex64::new(1.0, 0.0);
    let atom = poly::mul(&[a, one], &[a, one]);
    let band = [Complex64::new(4.0 * p.j * p.j, 0.0) - c * c, -2.0 * c, -one];
    let mut q = poly::mul(&atom, &band);
    q[0] += p.g.powi(4);
    q
}

/// Roots of [`pole_polynomial`], split into external (`|Re ω| > 2J`) and
/// internal ones, each sorted by real part.
pub fn poles(p: &SystemParams) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut r = poly::roots(&pole_polynomial(p))?;
    r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let edge = 2.0 * p.j;
    Ok(r.into_iter().partition(|z| z.re.abs() > edge))
}

pub fn excitation_spectrum(p: &SystemParams, omegas: &[f64]) -> Result<SpectralResult> {
    excitation_spectrum_with(p, omegas, Exec::default())
}

/// Spectrum `(γ_a²/4)/|ω − δ + iγ_a/2 − Σ(ω)|²`, normalised to 1 at
/// `ω = δ` for `g = 0`. Without atomic decay the prefactor is dropped.
pub fn excitation_spectrum_with(p: &SystemParams, omegas: &[f64], exec: Exec) -> Result<SpectralResult> {
    p.validate()?;
    let normalized = p.gamma_a > 0.0;
    let prefactor = if normalized { 0.25 * p.gamma_a * p.gamma_a } else { 1.0 };
    let values = par::map(exec, omegas, |&w| spectrum_value(w, p, prefactor));
    let (poles_external, poles_internal) = poles(p)?;
    Ok(SpectralResult {
        omegas: omegas.to_vec(),
        values,
        poles_external,
        poles_internal,
        gamma_bar: p.gamma_bar(),
        normalized,
    })
}

/// The same spectrum from `(γ_a²/4)|⟨e,0|(H_eff − ω)⁻¹|e,0⟩|²` on a
/// finite lattice with the first atom driven. One banded LU solve per
/// frequency; poles are left empty.
pub fn resolvent_spectrum_oracle(p: &SystemParams, lattice: &LatticeSpec, omegas: &[f64]) -> Result<SpectralResult> {
    let h = build_hamiltonian(p, lattice, 1, true)?;
    let n = h.dimension;
    let atom = h
        .basis
        .iter()
        .position(|b| b.photons.is_empty() && b.atoms == 1)
        .ok_or_else(|| Error::Inconsistent("driven atom missing from the basis".into()))?;
    let mut adj = vec![Vec::new(); n];
    for &(r, c, _) in &h.entries {
        if r != c {
            adj[r].push(c);
        }
    }
    let perm = rcm_order(&adj);
    let inv = invert(&perm);
    let bw = h.entries.iter().map(|&(r, c, _)| inv[r].abs_diff(inv[c])).max().unwrap_or(0);
    let normalized = p.gamma_a > 0.0;
    let prefactor = if normalized { 0.25 * p.gamma_a * p.gamma_a } else { 1.0 };
    let values = par::map(Exec::default(), omegas, |&w| -> Result<f64> {
        let mut entries: Vec<(usize, usize, Complex64)> =
            h.entries.iter().map(|&(r, c, v)| (inv[r], inv[c], v)).collect();
        entries.extend((0..n).map(|i| (i, i, Complex64::new(-w, 0.0))));
        let lu = ComplexBandLu::factor(n, bw, bw, &entries)?;
        if lu.pivot_ratio() < 1e-13 {
            return Err(Error::Singular(format!("H_eff − ω is numerically singular at ω = {w}")));
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[inv[atom]] = Complex64::new(1.0, 0.0);
        lu.solve(&mut x);
        Ok(prefactor * x[inv[atom]].norm_sqr())
    });
    Ok(SpectralResult {
        omegas: omegas.to_vec(),
        values: values.into_iter().collect::<Result<_>>()?,
        poles_external: Vec::new(),
        poles_internal: Vec::new(),
        gamma_bar: p.gamma_bar(),
        normalized,
    })
}

/// Weak-coupling estimates of the external poles at `δ = 0`.
pub fn external_pole_estimates(p: &SystemParams) -> [Complex64; 2] {
    let j = p.j;
    let shift = |s: f64| {
        let den = Complex64::new(16.0 * j.powi(3), 0.0) * Complex64::new(1.0, s * (p.gamma_a - p.gamma_c) / (2.0 * j));
        Complex64::new(s * 2.0 * j, -0.5 * p.gamma_c) + s * p.g.powi(4) / den
    };
    [shift(1.0), shift(-1.0)]
}

/// Internal poles at `δ = 0`: `−i(γ_a ± g²/J)/2`.
pub fn internal_pole_estimates(p: &SystemParams) -> [Complex64; 2] {
    let x = p.g * p.g / p.j;
    [Complex64::new(0.0, -0.5 * (p.gamma_a + x)), Complex64::new(0.0, -0.5 * (p.gamma_a - x))]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRegime {
    /// Coupling-induced loss equals the coherent shift.
    CriticallyDamped,
    Intermediate,
    StrongCoupling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEdgeEstimate {
    /// `2J + (g⁴/4J)^{1/3}`.
    pub e_plus_lossless: f64,
    /// Small-`g` lossy estimate; `None` when `γ_c = γ_a`, where it breaks down.
    pub e_plus_lossy: Option<Complex64>,
    pub regime: EdgeRegime,
}

/// Upper bound-state estimates for an atom tuned to the upper band edge.
pub fn band_edge_asymptotics(p: &SystemParams) -> Result<BandEdgeEstimate> {
    p.validate()?;
    if p.j <= 0.0 || (p.delta - 2.0 * p.j).abs() > 1e-12 * 2.0 * p.j {
        return Err(domain("delta", format!("band-edge expansion needs δ = 2J > 0, got δ = {}", p.delta)));
    }
    let t = thresholds(p);
    let dg = p.gamma_c - p.gamma_a;
    let e_plus_lossy = (dg != 0.0).then(|| {
        let mag = p.g * p.g / (2.0 * (p.j * dg.abs()).sqrt());
        let im_sign = if dg > 0.0 { -1.0 } else { 1.0 };
        Complex64::new(2.0 * p.j + mag, -0.5 * p.gamma_a + im_sign * mag)
    });
    let regime = if p.is_lossless() || (p.g > t.g_hybridize_edge && p.g > t.g_strong_edge) {
        EdgeRegime::StrongCoupling
    } else if p.g <= t.g_hybridize_edge {
        EdgeRegime::CriticallyDamped
    } else {
        EdgeRegime::Intermediate
    };
    Ok(BandEdgeEstimate { e_plus_lossless: 2.0 * p.j + t.beta, e_plus_lossy, regime })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    /// `sqrt(J γ_c)`: external peak resolvable at `δ = 0`.
    pub g_resolve: f64,
    /// `(8J³γ_c)^{1/4}`: strong coupling at `δ = 0`.
    pub g_strong_resonant: f64,
    /// `(J|γ_c − γ_a|³/4)^{1/4}`: hybridised band-edge state.
    pub g_hybridize_edge: f64,
    /// `(J γ̄³/2)^{1/4}`: strong coupling at the band edge.
    pub g_strong_edge: f64,
    /// Band-edge splitting `(g⁴/4J)^{1/3}`.
    pub beta: f64,
}

pub fn thresholds(p: &SystemParams) -> ThresholdReport {
    let j = p.j;
    let gb = p.gamma_bar();
    ThresholdReport {
        g_resolve: (j * p.gamma_c).sqrt(),
        g_strong_resonant: (8.0 * j.powi(3) * p.gamma_c).powf(0.25),
        g_hybridize_edge: (j * (p.gamma_c - p.gamma_a).abs().powi(3) / 4.0).powf(0.25),
        g_strong_edge: (j * gb.powi(3) / 2.0).powf(0.25),
        beta: if p.g == 0.0 { 0.0 } else { (p.g.powi(4) / (4.0 * j)).cbrt() },
    }
}

/// Localisation of a purely photonic state bound to a cavity whose
/// frequency is offset by `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpurityEstimate {
    pub epsilon: f64,
    /// `1/asinh(|ε|/2J)`; infinite at `ε = 0`.
    pub lambda_ell: f64,
}

impl ImpurityEstimate {
    /// Disorder leaves a bound state intact when `λ_ℓ ≥ factor·λ`.
    pub fn leaves_intact(&self, bs: &BoundState1, factor: f64) -> bool {
        self.lambda_ell >= factor * bs.lambda
    }
}

pub fn impurity_localization(epsilon: f64, p: &SystemParams) -> Result<ImpurityEstimate> {
    if p.j <= 0.0 || !epsilon.is_finite() {
        return Err(domain("J", "impurity localisation needs J > 0 and finite ε"));
    }
    let x = (epsilon.abs() / (2.0 * p.j)).asinh();
    let lambda_ell = if x == 0.0 { f64::INFINITY } else { 1.0 / x };
    Ok(ImpurityEstimate { epsilon, lambda_ell })
}
