//! Bound states of several atoms sharing the waveguide: parity-resolved
//! two-atom states, metaband edges of regular arrays, melting of the odd
//! states, and the dressed-state exchange coupling.

use crate::error::{domain, Error, Result};
use crate::exact_diag::full_spectrum;
use crate::numerics::roots;
use crate::params::{Branch, LatticeSpec, SystemParams};
use crate::single_photon::solve_bound_energies;

/// Relative tolerance shared by the existence inequalities and the root
/// search when an odd state sits exactly at its threshold.
pub const MARGINAL_TOL: f64 = 1e-12;

/// Sign in front of `e^{−d/λ}` in the self-energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    TwoAtoms,
    ManyAtoms,
}

/// Single-atom self-energy `g²/(E sqrt(1 − 4J²/E²))` outside the band.
pub fn self_energy_single(e: f64, p: &SystemParams) -> Result<f64> {
    if e.abs() <= 2.0 * p.j {
        return Err(domain("E", format!("|{e}| is inside the band [−2J, 2J]")));
    }
    Ok(p.g * p.g / (e * (1.0 - 4.0 * p.j * p.j / (e * e)).sqrt()))
}

/// `h(u)` with `u = 1/λ`: `1 ± e^{−du}` for two atoms, `coth(Δx u/2)` or
/// `tanh(Δx u/2)` for a long array. Returns `(h, dh/du)`.
fn factor(parity: Parity, regime: Regime, d: f64, u: f64) -> (f64, f64) {
    match (regime, parity) {
        (Regime::TwoAtoms, Parity::Even) => {
            let e = (-d * u).exp();
            (1.0 + e, -d * e)
        }
        // expm1 keeps the small-u limit `h/sinh u → d` accurate.
        (Regime::TwoAtoms, Parity::Odd) => (-(-d * u).exp_m1(), d * (-d * u).exp()),
        (Regime::ManyAtoms, Parity::Even) => {
            let a = 0.5 * d;
            let sh = (a * u).sinh();
            (1.0 / (a * u).tanh(), -a / (sh * sh))
        }
        (Regime::ManyAtoms, Parity::Odd) => {
            let a = 0.5 * d;
            let ch = (a * u).cosh();
            ((a * u).tanh(), a / (ch * ch))
        }
    }
}

/// The parity factor multiplying the single-atom self-energy at energy
/// `E`, for atoms a distance `d` (or spacing `Δx`) apart.
pub fn parity_factor(parity: Parity, e: f64, d: usize, regime: Regime, p: &SystemParams) -> Result<f64> {
    if e.abs() <= 2.0 * p.j {
        return Err(domain("E", format!("|{e}| is inside the band [−2J, 2J]")));
    }
    let u = (e.abs() / (2.0 * p.j)).acosh();
    Ok(factor(parity, regime, d as f64, u).0)
}

/// `g²d_eff` with `d_eff = d` for two atoms and `Δx/2` for an array: the
/// `u → 0` limit of `g² h(u)/sinh u` for odd parity.
fn odd_weight(regime: Regime, d: f64) -> f64 {
    match regime {
        Regime::TwoAtoms => d,
        Regime::ManyAtoms => 0.5 * d,
    }
}

/// Value of the bound-state condition at the band edge for odd parity;
/// the odd state exists iff it is not positive (up to [`MARGINAL_TOL`]).
fn odd_edge_value(p: &SystemParams, branch: Branch, regime: Regime, d: f64) -> f64 {
    2.0 * p.j - branch.sign() * p.delta - p.g * p.g * odd_weight(regime, d) / (2.0 * p.j)
}

fn marginal_scale(p: &SystemParams) -> f64 {
    MARGINAL_TOL * (2.0 * p.j + p.delta.abs())
}

/// Outcome of solving one parity equation.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Root {
    Found(f64),
    /// Exactly at threshold: `E = ±2J`, infinite λ.
    Marginal,
    Absent,
}

/// `G(u) = 2J cosh u − sδ − g² h(u)/(2J sinh u)`, increasing in `u`, with
/// `E = s·2J cosh u`. Roots are bracketed by halving from below and
/// doubling from above.
fn solve_parity(p: &SystemParams, branch: Branch, parity: Parity, regime: Regime, d: f64) -> Result<Root> {
    let tj = 2.0 * p.j;
    let g2 = p.g * p.g;
    let s = branch.sign();
    let f = |u: f64| {
        let (sh, ch) = (u.sinh(), u.cosh());
        let (h, dh) = factor(parity, regime, d, u);
        let q = h / sh;
        let dq = dh / sh - h * ch / (sh * sh);
        (tj * ch - s * p.delta - g2 * q / tj, tj * sh - g2 * dq / tj)
    };
    let mut hi = 1.0;
    while f(hi).0 <= 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::Inconsistent("no upper bracket for a parity equation".into()));
        }
    }
    let mut lo = 0.5 * hi;
    while f(lo).0 >= 0.0 {
        lo *= 0.5;
        if lo < 1e-150 {
            let edge = if parity == Parity::Odd { odd_edge_value(p, branch, regime, d) } else { f64::NEG_INFINITY };
            return Ok(if edge.abs() <= marginal_scale(p) { Root::Marginal } else { Root::Absent });
        }
    }
    Ok(Root::Found(roots::bisect_newton(f, lo, hi, 1e-16)?))
}

/// Odd-state existence from the threshold inequality alone.
pub fn odd_state_exists(p: &SystemParams, branch: Branch, regime: Regime, d: usize) -> bool {
    odd_edge_value(p, branch, regime, d as f64) <= marginal_scale(p)
}

/// A parity-resolved two-atom bound state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomBound {
    pub parity: Parity,
    pub branch: Branch,
    pub distance: usize,
    pub exists: bool,
    pub energy: Option<f64>,
    /// Infinite for a state exactly at threshold.
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    /// `sqrt(coth(1/λ)(1 ± e^{−d/λ}) ± d e^{−d/λ})`; `None` at threshold.
    pub normalizer: Option<f64>,
    /// Relative sign of the two atomic amplitudes.
    pub atom_sign: f64,
    residual: f64,
    g: f64,
}

impl TwoAtomBound {
    /// `|E − δ − Σ_s(E)|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Atomic amplitudes of the atoms at 0 and `d`.
    pub fn atom_amplitudes(&self) -> Option<(f64, f64)> {
        let c = self.theta?.cos() / std::f64::consts::SQRT_2;
        Some((c, self.atom_sign * c))
    }

    /// Photon amplitude at site `x` with the atoms at 0 and `d`; `None`
    /// for absent or non-normalisable states.
    pub fn photon_amplitude(&self, x: i64) -> Option<f64> {
        let (lam, theta, n) = (self.lambda?, self.theta?, self.normalizer?);
        if !lam.is_finite() || self.g == 0.0 {
            return None;
        }
        let alt = |k: i64| if self.branch == Branch::Upper && k % 2 != 0 { -1.0 } else { 1.0 };
        let mode = |k: i64| alt(k.abs()) * (-(k.abs() as f64) / lam).exp();
        let d = self.distance as i64;
        let outer = match self.branch {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        };
        Some(outer * theta.sin() * (mode(x) + self.atom_sign * mode(x - d)) / (std::f64::consts::SQRT_2 * n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExistenceCase {
    BothOddExist,
    OnlyOneOddExists,
    NoOddExists,
}

impl ExistenceCase {
    pub fn name(self) -> &'static str {
        match self {
            ExistenceCase::BothOddExist => "both_odd_exist",
            ExistenceCase::OnlyOneOddExists => "only_one_odd_exists",
            ExistenceCase::NoOddExists => "no_odd_exists",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceReport {
    /// Coupling above which both odd states exist at unit distance
    /// (times √2 for an array).
    pub g_m: f64,
    /// Distance `(g_m/g)²` from which both odd states exist.
    pub x_m: Option<f64>,
    pub g_m_upper: f64,
    pub g_m_lower: f64,
    pub upper_odd_exists: bool,
    pub lower_odd_exists: bool,
    pub case: ExistenceCase,
}

fn existence(p: &SystemParams, d: usize, regime: Regime) -> ExistenceReport {
    let tj = 2.0 * p.j;
    let extra = if regime == Regime::ManyAtoms { std::f64::consts::SQRT_2 } else { 1.0 };
    let g_m_upper = extra * tj * (1.0 - p.delta / tj).max(0.0).sqrt();
    let g_m_lower = extra * tj * (1.0 + p.delta / tj).max(0.0).sqrt();
    let upper = odd_state_exists(p, Branch::Upper, regime, d);
    let lower = odd_state_exists(p, Branch::Lower, regime, d);
    let g_m = g_m_upper.max(g_m_lower);
    let case = match (upper, lower) {
        (true, true) => ExistenceCase::BothOddExist,
        (false, false) => ExistenceCase::NoOddExists,
        _ => ExistenceCase::OnlyOneOddExists,
    };
    ExistenceReport {
        g_m,
        x_m: (p.g > 0.0).then(|| (g_m / p.g).powi(2)),
        g_m_upper,
        g_m_lower,
        upper_odd_exists: upper,
        lower_odd_exists: lower,
        case,
    }
}

/// Odd-state existence for two atoms a distance `d` apart.
pub fn existence_classification(p: &SystemParams, d: usize) -> ExistenceReport {
    existence(p, d, Regime::TwoAtoms)
}

/// Odd-edge existence for a long array with spacing `dx`.
pub fn existence_classification_many(p: &SystemParams, dx: usize) -> ExistenceReport {
    existence(p, dx, Regime::ManyAtoms)
}

/// All four parity states (upper even/odd, lower even/odd) of two atoms
/// a distance `d` apart. Odd-state existence is predicted from the
/// threshold inequality, then confirmed by the root search.
pub fn solve_two_atom(p: &SystemParams, d: usize) -> Result<(Vec<TwoAtomBound>, ExistenceReport)> {
    p.validate()?;
    if p.g <= 0.0 || p.j <= 0.0 || d == 0 {
        return Err(domain("params", "two-atom bound states need g > 0, J > 0 and d ≥ 1"));
    }
    let report = existence_classification(p, d);
    let tj = 2.0 * p.j;
    let mut out = Vec::with_capacity(4);
    for branch in [Branch::Upper, Branch::Lower] {
        for parity in [Parity::Even, Parity::Odd] {
            let predicted = match (parity, branch) {
                (Parity::Even, _) => true,
                (Parity::Odd, Branch::Upper) => report.upper_odd_exists,
                (Parity::Odd, Branch::Lower) => report.lower_odd_exists,
            };
            let root = solve_parity(p, branch, parity, Regime::TwoAtoms, d as f64)?;
            if predicted != (root != Root::Absent) {
                return Err(Error::Inconsistent(format!(
                    "{} {} state at d = {d}: threshold says {predicted}, root search says {root:?}",
                    branch.name(),
                    parity.name()
                )));
            }
            let atom_sign = match branch {
                Branch::Lower => parity.sign(),
                Branch::Upper if d % 2 == 1 => -parity.sign(),
                Branch::Upper => parity.sign(),
            };
            let mut state = TwoAtomBound {
                parity,
                branch,
                distance: d,
                exists: root != Root::Absent,
                energy: None,
                lambda: None,
                theta: None,
                normalizer: None,
                atom_sign,
                residual: 0.0,
                g: p.g,
            };
            match root {
                Root::Absent => {}
                Root::Marginal => {
                    state.energy = Some(branch.sign() * tj);
                    state.lambda = Some(f64::INFINITY);
                    state.theta = Some(std::f64::consts::FRAC_PI_2);
                    state.residual = odd_edge_value(p, branch, Regime::TwoAtoms, d as f64).abs();
                }
                Root::Found(u) => {
                    let (sh, ch) = (u.sinh(), u.cosh());
                    let e = (-(d as f64) * u).exp();
                    let s = parity.sign();
                    let n2 = (ch / sh) * (1.0 + s * e) + s * d as f64 * e;
                    let cos = (1.0 + p.g * p.g * n2 / (tj * tj * sh * sh)).powf(-0.5);
                    let energy = branch.sign() * tj * ch;
                    let sigma = branch.sign() * p.g * p.g * (1.0 + s * e) / (tj * sh);
                    state.energy = Some(energy);
                    state.lambda = Some(1.0 / u);
                    state.theta = Some(cos.clamp(0.0, 1.0).acos());
                    state.normalizer = Some(n2.sqrt());
                    state.residual = (energy - p.delta - sigma).abs();
                }
            }
            out.push(state);
        }
    }
    Ok((out, report))
}

/// Exchange coupling between two distant lower dressed states. At `δ = 0`
/// the closed form `2J cosh(1/λ)/(1 + coth²(1/λ)) e^{−d/λ}` is used;
/// elsewhere half the odd-even splitting from [`solve_two_atom`].
pub fn dressed_dipole_coupling(p: &SystemParams, d: usize) -> Result<f64> {
    if p.delta == 0.0 {
        let (_, lo) = solve_bound_energies(p)?;
        let u = 1.0 / lo.lambda;
        let coth = 1.0 / u.tanh();
        return Ok(2.0 * p.j * u.cosh() / (1.0 + coth * coth) * (-(d as f64) * u).exp());
    }
    let (states, _) = solve_two_atom(p, d)?;
    let energy = |parity| {
        states
            .iter()
            .find(|s| s.branch == Branch::Lower && s.parity == parity)
            .and_then(|s| s.energy)
            .ok_or_else(|| domain("d", format!("no lower {} state at d = {d}", parity.name())))
    };
    Ok(0.5 * (energy(Parity::Odd)? - energy(Parity::Even)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Melted {
    None,
    Partial,
    Full,
}

impl Melted {
    pub fn name(self) -> &'static str {
        match self {
            Melted::None => "none",
            Melted::Partial => "partial",
            Melted::Full => "full",
        }
    }
}

/// Edges of the band of dressed states of a regular array on one side
/// of the photonic band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaBand {
    pub spacing: usize,
    pub branch: Branch,
    pub e_upper_edge: Option<f64>,
    pub e_lower_edge: Option<f64>,
    pub melted: Melted,
}

/// Upper- and lower-branch metabands for spacing `dx`. On each side the
/// in-phase (coth) solution is the outer edge and the staggered (tanh)
/// solution the inner edge, which melts into the band below threshold.
pub fn metaband_edges(p: &SystemParams, dx: usize) -> Result<(MetaBand, MetaBand)> {
    p.validate()?;
    if p.g <= 0.0 || p.j <= 0.0 || dx == 0 {
        return Err(domain("params", "metabands need g > 0, J > 0 and Δx ≥ 1"));
    }
    let tj = 2.0 * p.j;
    let edge = |branch: Branch, parity: Parity| -> Result<Option<f64>> {
        Ok(match solve_parity(p, branch, parity, Regime::ManyAtoms, dx as f64)? {
            Root::Found(u) => Some(branch.sign() * tj * u.cosh()),
            Root::Marginal => Some(branch.sign() * tj),
            Root::Absent => None,
        })
    };
    let band = |branch: Branch| -> Result<MetaBand> {
        let outer = edge(branch, Parity::Even)?;
        let inner = edge(branch, Parity::Odd)?;
        let predicted = odd_state_exists(p, branch, Regime::ManyAtoms, dx);
        if predicted != inner.is_some() {
            return Err(Error::Inconsistent(format!("{} metaband inner edge at Δx = {dx}", branch.name())));
        }
        let melted = match (outer.is_some(), inner.is_some()) {
            (true, true) => Melted::None,
            (false, false) => Melted::Full,
            _ => Melted::Partial,
        };
        let (e_upper_edge, e_lower_edge) = match branch {
            Branch::Upper => (outer, inner),
            Branch::Lower => (inner, outer),
        };
        Ok(MetaBand { spacing: dx, branch, e_upper_edge, e_lower_edge, melted })
    };
    Ok((band(Branch::Upper)?, band(Branch::Lower)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandTag {
    BoundUpper,
    BoundLower,
    Continuum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactBand {
    pub energies: Vec<f64>,
    pub tags: Vec<BandTag>,
    pub n_upper: usize,
    pub n_lower: usize,
}

impl ExactBand {
    fn extreme(&self, tag: BandTag, hi: bool) -> Option<f64> {
        let it = self.energies.iter().zip(&self.tags).filter(|(_, t)| **t == tag).map(|(e, _)| *e);
        if hi {
            it.fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))))
        } else {
            it.fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.min(e))))
        }
    }

    /// `(highest, lowest)` bound energy above the band.
    pub fn upper_extremes(&self) -> Option<(f64, f64)> {
        Some((self.extreme(BandTag::BoundUpper, true)?, self.extreme(BandTag::BoundUpper, false)?))
    }

    /// `(highest, lowest)` bound energy below the band.
    pub fn lower_extremes(&self) -> Option<(f64, f64)> {
        Some((self.extreme(BandTag::BoundLower, true)?, self.extreme(BandTag::BoundLower, false)?))
    }
}

/// Full single-excitation spectrum of an atom array, with states outside
/// `[−2J, 2J]` tagged as bound.
pub fn multi_atom_exact_band(p: &SystemParams, lattice: &LatticeSpec) -> Result<ExactBand> {
    let energies = full_spectrum(p, lattice, 1)?;
    let edge = 2.0 * p.j;
    let tags: Vec<BandTag> = energies
        .iter()
        .map(|&e| {
            if e > edge {
                BandTag::BoundUpper
            } else if e < -edge {
                BandTag::BoundLower
            } else {
                BandTag::Continuum
            }
        })
        .collect();
    let n_upper = tags.iter().filter(|t| **t == BandTag::BoundUpper).count();
    let n_lower = tags.iter().filter(|t| **t == BandTag::BoundLower).count();
    Ok(ExactBand { energies, tags, n_upper, n_lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_diag::full_eigensystem;
    use crate::params::Boundary;
    use approx::assert_relative_eq;

    const E_QUARTIC: f64 = 1.272_019_649_514_069;

    #[test]
    fn self_energy_fixed_point() {
        let p = SystemParams::new(0.5, 0.0, 1.0);
        assert_relative_eq!(self_energy_single(E_QUARTIC, &p).unwrap(), E_QUARTIC, max_relative = 1e-13);
        assert!(self_energy_single(0.9, &p).is_err());
        assert!(self_energy_single(1e12, &p).unwrap() < 1e-11);
        assert!(self_energy_single(-E_QUARTIC, &p).unwrap() < 0.0);
    }

    #[test]
    fn parity_factor_limits() {
        let p = SystemParams::new(0.5, 0.0, 1.0);
        let e = -1.2;
        let even = parity_factor(Parity::Even, e, 3, Regime::TwoAtoms, &p).unwrap();
        let odd = parity_factor(Parity::Odd, e, 3, Regime::TwoAtoms, &p).unwrap();
        assert_relative_eq!(even + odd, 2.0, max_relative = 1e-15);
        assert_relative_eq!(parity_factor(Parity::Even, e, 4000, Regime::TwoAtoms, &p).unwrap(), 1.0);
        assert_relative_eq!(parity_factor(Parity::Even, e, 4000, Regime::ManyAtoms, &p).unwrap(), 1.0);
        assert_relative_eq!(parity_factor(Parity::Odd, e, 4000, Regime::ManyAtoms, &p).unwrap(), 1.0);
        assert_eq!(parity_factor(Parity::Odd, e, 0, Regime::TwoAtoms, &p).unwrap(), 0.0);
        assert!(parity_factor(Parity::Odd, 0.5, 2, Regime::TwoAtoms, &p).is_err());
    }

    fn lower(states: &[TwoAtomBound], parity: Parity) -> TwoAtomBound {
        *states.iter().find(|s| s.branch == Branch::Lower && s.parity == parity).unwrap()
    }

    #[test]
    fn distant_atoms_recover_single_atom_energy() {
        let p = SystemParams::new(0.5, 0.0, 1.0);
        let (states, _) = solve_two_atom(&p, 20).unwrap();
        assert!((lower(&states, Parity::Even).energy.unwrap() + E_QUARTIC).abs() < 1e-5);
        assert!((lower(&states, Parity::Odd).energy.unwrap() + E_QUARTIC).abs() < 1e-5);
        for s in &states {
            assert!(s.residual() < 1e-10 * p.j);
        }
    }

    #[test]
    fn melting_distance_at_resonance() {
        let p = SystemParams::new(0.5, 0.0, 0.5);
        for d in 1..=8 {
            let (states, report) = solve_two_atom(&p, d).unwrap();
            assert_eq!(lower(&states, Parity::Odd).exists, d >= 4, "d = {d}");
            assert_eq!(report.x_m, Some(4.0));
            assert_relative_eq!(report.g_m, 1.0);
        }
        let (states, _) = solve_two_atom(&p, 4).unwrap();
        let marginal = lower(&states, Parity::Odd);
        assert_eq!(marginal.energy, Some(-1.0));
        assert_eq!(marginal.lambda, Some(f64::INFINITY));
    }

    #[test]
    fn level_ordering_and_mirror() {
        let p = SystemParams::new(0.5, 0.3, 0.8);
        let (single_up, single_lo) = solve_bound_energies(&p).unwrap();
        let (states, _) = solve_two_atom(&p, 3).unwrap();
        let (e, o) = (lower(&states, Parity::Even), lower(&states, Parity::Odd));
        assert!(e.energy.unwrap() < single_lo.energy && single_lo.energy < o.energy.unwrap());
        let (mirrored, _) = solve_two_atom(&p.mirrored(), 3).unwrap();
        for s in &states {
            let m = mirrored.iter().find(|m| m.parity == s.parity && m.branch != s.branch).unwrap();
            assert_eq!(s.exists, m.exists);
            if let (Some(a), Some(b)) = (s.energy, m.energy) {
                assert_relative_eq!(a, -b, max_relative = 1e-12);
            }
        }
        let up_even = states.iter().find(|s| s.branch == Branch::Upper && s.parity == Parity::Even).unwrap();
        assert!(up_even.energy.unwrap() > single_up.energy);
    }

    #[test]
    fn three_existence_cases() {
        let (j, delta) = (0.5, 0.5);
        let case = |g: f64| existence_classification(&SystemParams::new(j, delta, g), 1).case;
        // Thresholds 2J·sqrt(1 ∓ δ/2J): 0.707 (upper) and 1.225 (lower).
        assert_eq!(case(1.3), ExistenceCase::BothOddExist);
        assert_eq!(case(1.0), ExistenceCase::OnlyOneOddExists);
        assert_eq!(case(0.5), ExistenceCase::NoOddExists);
        let r = existence_classification(&SystemParams::new(j, delta, 1.0), 1);
        assert!(r.upper_odd_exists && !r.lower_odd_exists);
        let zero = |g: f64| existence_classification(&SystemParams::new(j, 0.0, g), 2).case;
        for g in [0.2, 0.5, 0.7071, 0.7072, 1.2] {
            assert_ne!(zero(g), ExistenceCase::OnlyOneOddExists);
        }
        let many = existence_classification_many(&SystemParams::new(j, 0.0, 1.0), 1);
        assert_relative_eq!(many.g_m, 2.0 * std::f64::consts::SQRT_2 * j, max_relative = 1e-15);
    }

    #[test]
    fn two_atom_states_match_exact_diagonalisation() {
        let p = SystemParams::new(0.5, 0.2, 0.7);
        let d = 3;
        let (states, _) = solve_two_atom(&p, d).unwrap();
        let lam = states.iter().filter_map(|s| s.lambda).filter(|l| l.is_finite()).fold(0.0, f64::max);
        let pad = (40.0 * lam) as usize + 20;
        let l = LatticeSpec::new(2 * pad + d + 1, Boundary::Open, vec![pad, pad + d]).unwrap();
        let (w, v, basis) = full_eigensystem(&p, &l, 1).unwrap();
        for s in states.iter().filter(|s| s.exists) {
            let e = s.energy.unwrap();
            let (i, _) = w.iter().enumerate().min_by(|a, b| (a.1 - e).abs().total_cmp(&(b.1 - e).abs())).unwrap();
            assert!((w[i] - e).abs() < 1e-10, "{:?} {} vs {}", s.parity, w[i], e);
            let (a1, a2) = s.atom_amplitudes().unwrap();
            let analytic: Vec<f64> = basis
                .iter()
                .map(|b| match (b.atoms, b.photons.as_slice()) {
                    (1, []) => a1,
                    (2, []) => a2,
                    (0, [x]) => s.photon_amplitude(*x as i64 - pad as i64).unwrap(),
                    _ => unreachable!(),
                })
                .collect();
            let ov: f64 = analytic.iter().zip(v.column(i).iter()).map(|(a, b)| a * b).sum();
            assert!(ov.abs() > 1.0 - 1e-8, "{:?} {:?}: overlap {ov}", s.branch, s.parity);
        }
    }

    #[test]
    fn closed_form_exchange_coupling() {
        let p = SystemParams::new(0.5, 0.0, 1.0);
        let u = E_QUARTIC.acosh();
        let coth = 1.0 / u.tanh();
        let prefactor = E_QUARTIC / (1.0 + coth * coth);
        assert!((prefactor - 0.35158).abs() < 1e-5);
        assert_relative_eq!(
            dressed_dipole_coupling(&p, 3).unwrap(),
            prefactor * (-3.0 * u).exp(),
            max_relative = 1e-12
        );
        assert!((dressed_dipole_coupling(&p, 3).unwrap() - 0.040_325_224_750).abs() < 1e-10);
        let (states, _) = solve_two_atom(&p, 10).unwrap();
        let half = 0.5 * (lower(&states, Parity::Odd).energy.unwrap() - lower(&states, Parity::Even).energy.unwrap());
        assert_relative_eq!(dressed_dipole_coupling(&p, 10).unwrap(), half, max_relative = 1e-2);
        assert!(dressed_dipole_coupling(&p, 200).unwrap() < 1e-60);
        let numeric = dressed_dipole_coupling(&p.with_delta(0.1), 6).unwrap();
        assert!(numeric > 0.0);
    }

    #[test]
    fn metabands_converge_to_single_atom() {
        let p = SystemParams::new(0.5, 0.6, 1.0);
        let (single_up, single_lo) = solve_bound_energies(&p).unwrap();
        let (up, lo) = metaband_edges(&p, 60).unwrap();
        for e in [up.e_upper_edge, up.e_lower_edge] {
            assert!((e.unwrap() - single_up.energy).abs() < 1e-10);
        }
        for e in [lo.e_upper_edge, lo.e_lower_edge] {
            assert!((e.unwrap() - single_lo.energy).abs() < 1e-10);
        }
        let (up, lo) = metaband_edges(&p, 4).unwrap();
        assert!(up.e_upper_edge.unwrap() > up.e_lower_edge.unwrap());
        assert!(lo.e_upper_edge.unwrap() > lo.e_lower_edge.unwrap());
        assert_eq!((up.melted, lo.melted), (Melted::None, Melted::None));
        // The lower inner edge needs g²Δx/(4J) ≥ 2J + δ.
        let (_, lo) = metaband_edges(&p, 2).unwrap();
        assert_eq!(lo.melted, Melted::Partial);
    }

    #[test]
    fn metaband_melting_at_resonance() {
        // Inner edges need g ≥ √2·2J/√Δx at δ = 0.
        let p = SystemParams::new(0.5, 0.0, 1.0);
        let (up, lo) = metaband_edges(&p, 1).unwrap();
        assert_eq!((up.melted, lo.melted), (Melted::Partial, Melted::Partial));
        assert!(up.e_lower_edge.is_none() && lo.e_upper_edge.is_none());
        let (up, _) = metaband_edges(&p, 3).unwrap();
        assert_eq!(up.melted, Melted::None);
    }

    #[test]
    fn exact_band_single_and_two_atoms() {
        let p = SystemParams::new(0.5, 0.1, 0.6);
        let (up, lo) = solve_bound_energies(&p).unwrap();
        let one = multi_atom_exact_band(&p, &LatticeSpec::single_atom_ring(200)).unwrap();
        assert_eq!((one.n_upper, one.n_lower), (1, 1));
        assert!((one.upper_extremes().unwrap().0 - up.energy).abs() < 1e-10);
        assert!((one.lower_extremes().unwrap().0 - lo.energy).abs() < 1e-10);
        let d = 2;
        let l = LatticeSpec::new(301, Boundary::Open, vec![149, 151]).unwrap();
        let two = multi_atom_exact_band(&p, &l).unwrap();
        let (states, _) = solve_two_atom(&p, d).unwrap();
        let analytic: Vec<f64> = states.iter().filter_map(|s| s.energy.filter(|e| e.abs() > 1.0)).collect();
        assert_eq!(analytic.len(), two.n_upper + two.n_lower);
        for e in analytic {
            assert!(two.energies.iter().any(|w| (w - e).abs() < 1e-6 * p.j));
        }
    }
}
