//! Variational ladder of multi-photon bound states below the band.
//!
//! The trial state for `N_e` excitations is
//! `cos θ σ₊|A⟩ − sin θ |B⟩`, where `|B⟩ = Π_n b†_n|0⟩` puts one photon in
//! each exponential mode `f_n(x) = e^{−|x|/λ_n}` and `|A⟩` is the
//! `N_e − 1` photon state `Σ_i sinh(1/λ_i) Π_{n≠i} b†_n|0⟩`. Expectation
//! values follow from the mode overlaps `S_mn = Σ_x f_m f_n` and hopping
//! matrix elements `T_mn = −J Σ_x f_m(x)[f_n(x+1) + f_n(x−1)]` through
//! bosonic contractions, which are matrix permanents.

use crate::error::{domain, Error, Result};
use crate::numerics::nelder_mead::{self, minimize};
use crate::numerics::permanent::{minor, permanent};
use crate::params::SystemParams;
use crate::single_photon::solve_bound_energies;
use nalgebra::DMatrix;

/// Search box for the optimised localisation length.
pub const LAMBDA_MIN: f64 = 1e-3;
pub const LAMBDA_MAX: f64 = 1e7;
/// Lattice sums run over `|x| ≤ ceil(TRUNCATION · max λ)`.
pub const TRUNCATION: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    pub n_excitations: usize,
    /// Mixing angle; `cos²θ` is the atomic population.
    pub theta: f64,
    /// Mode lengths, `λ₁` from the single-photon solution and `λ_{N_e}`
    /// optimised last.
    pub lambdas: Vec<f64>,
    pub energy: f64,
    /// Tail lengths from the cosh relation; `None` where the photon is
    /// not exponentially bound.
    pub lambdas_asymptotic: Vec<Option<f64>>,
    /// The optimum sits on the edge of the λ search box.
    pub boundary_hit: bool,
    /// `energy < E^{(N_e−1)} − 2J`, i.e. below the bound-plus-free band.
    pub undercuts_band: bool,
    pub iterations: usize,
}

impl VariationalState {
    pub fn atomic_population(&self) -> f64 {
        self.theta.cos().powi(2)
    }
}

/// Atom-part energy, photon-part energy and their coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parts {
    pub e_atom: f64,
    pub e_photon: f64,
    pub coupling: f64,
}

impl Parts {
    /// `cos²θ E_A + sin²θ E_B − 2 sinθ cosθ V`.
    pub fn energy(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * c * self.e_atom + s * s * self.e_photon - 2.0 * s * c * self.coupling
    }

    /// Minimising angle in `[0, π/2]` (the coupling is positive).
    pub fn optimal_theta(&self) -> f64 {
        0.5 * self.coupling.atan2(0.5 * (self.e_photon - self.e_atom))
    }

    pub fn minimum(&self) -> f64 {
        let mean = 0.5 * (self.e_atom + self.e_photon);
        let half = 0.5 * (self.e_atom - self.e_photon);
        mean - (half * half + self.coupling * self.coupling).sqrt()
    }
}

/// `(S, T)` for the modes `λ`, summed over `|x| ≤ R`. The sums are
/// geometric and are evaluated in closed form, exactly for the
/// truncated lattice.
pub fn mode_sums(lambdas: &[f64], j: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = lambdas.len();
    let r = (TRUNCATION * lambdas.iter().fold(0.0_f64, |m, &l| m.max(l))).ceil();
    let u: Vec<f64> = lambdas.iter().map(|l| 1.0 / l).collect();
    let a: Vec<f64> = u.iter().map(|u| (-u).exp()).collect();
    // Σ_{x=1}^{R} c^{x−1} with c = e^{−(u_m+u_n)}.
    let geo = |m: usize, k: usize| {
        let w = u[m] + u[k];
        -(-w * r).exp_m1() / -(-w).exp_m1()
    };
    let s = DMatrix::from_fn(n, n, |m, k| 1.0 + 2.0 * a[m] * a[k] * geo(m, k));
    let t = DMatrix::from_fn(n, n, |m, k| -j * (2.0 * a[k] + 2.0 * a[m] * (1.0 + a[k] * a[k]) * geo(m, k)));
    (s, t)
}

/// `E_A`, `E_B` and `V` for the given mode lengths.
pub fn variational_parts(p: &SystemParams, lambdas: &[f64]) -> Result<Parts> {
    p.validate()?;
    if p.j <= 0.0 {
        return Err(domain("J", "the variational ladder needs J > 0"));
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(domain("lambda", format!("mode lengths must be finite and positive, got {lambdas:?}")));
    }
    let n = lambdas.len();
    let (s, t) = mode_sums(lambdas, p.j);
    let w: Vec<f64> = lambdas.iter().map(|l| (1.0 / l).sinh()).collect();

    let nb = permanent(&s);
    let mut hb = 0.0;
    for k in 0..n {
        for l in 0..n {
            hb += t[(k, l)] * permanent(&minor(&s, &[k], &[l]));
        }
    }
    let (mut na, mut ha, mut c) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for jj in 0..n {
            let pij = permanent(&minor(&s, &[i], &[jj]));
            na += w[i] * w[jj] * pij;
            // f_j(0) = 1 for every mode.
            c += w[i] * pij;
            for k in (0..n).filter(|&k| k != i) {
                for l in (0..n).filter(|&l| l != jj) {
                    ha += w[i] * w[jj] * t[(k, l)] * permanent(&minor(&s, &[i, k], &[jj, l]));
                }
            }
        }
    }
    Ok(Parts { e_atom: p.delta + ha / na, e_photon: hb / nb, coupling: p.g * c / (na * nb).sqrt() })
}

/// `⟨Ψ|H|Ψ⟩` of the normalised trial state.
pub fn variational_energy(p: &SystemParams, theta: f64, lambdas: &[f64]) -> Result<f64> {
    Ok(variational_parts(p, lambdas)?.energy(theta))
}

/// The exact single-photon lower bound state as the first rung.
pub fn single_photon_level(p: &SystemParams) -> Result<VariationalState> {
    let (_, lo) = solve_bound_energies(p)?;
    if p.j <= 0.0 {
        return Err(domain("J", "the variational ladder needs J > 0"));
    }
    Ok(VariationalState {
        n_excitations: 1,
        theta: lo.theta,
        lambdas: vec![lo.lambda],
        energy: lo.energy,
        lambdas_asymptotic: vec![Some(lo.lambda)],
        boundary_hit: false,
        undercuts_band: true,
        iterations: 0,
    })
}

/// Adds one photon: keeps `previous.lambdas` and minimises over
/// `(θ, ln λ_{N_e})` with Nelder-Mead from three seeds.
pub fn minimize_level(p: &SystemParams, previous: &VariationalState) -> Result<VariationalState> {
    let fixed = previous.lambdas.clone();
    let last = *fixed.last().ok_or_else(|| domain("previous", "empty ladder state"))?;
    let (lo, hi) = (LAMBDA_MIN.ln(), LAMBDA_MAX.ln());
    let with = |lam: f64| {
        let mut l = fixed.clone();
        l.push(lam);
        l
    };
    let objective = |x: &[f64]| {
        let y = x[1].clamp(lo, hi);
        let penalty = (x[1] - y).powi(2);
        match variational_parts(p, &with(y.exp())) {
            Ok(parts) => parts.energy(x[0]) + penalty,
            Err(_) => f64::INFINITY,
        }
    };
    let opts = nelder_mead::Options { ftol: 1e-13, xtol: 1e-10, max_iter: 5000 };
    let mut best: Option<nelder_mead::Minimum> = None;
    let mut trace = Vec::new();
    let mut iterations = 0;
    for seed in [last, 2.0 * last, 10.0 * last] {
        let seed = seed.clamp(LAMBDA_MIN, LAMBDA_MAX);
        let theta0 = variational_parts(p, &with(seed))?.optimal_theta();
        let m = minimize(objective, &[theta0, seed.ln()], &[0.05, 0.3], opts);
        iterations += m.iterations;
        trace.push(format!("seed λ = {seed:.6e}: E = {:.12e} after {} steps", m.fx, m.iterations));
        if m.converged && best.as_ref().map_or(true, |b| m.fx < b.fx) {
            best = Some(m);
        }
    }
    let best = best.ok_or_else(|| Error::Stagnation(trace.join("; ")))?;
    let ln_lam = best.x[1].clamp(lo, hi);
    let lambdas = with(ln_lam.exp());
    let parts = variational_parts(p, &lambdas)?;
    let theta = parts.optimal_theta();
    let energy = parts.minimum();
    let edge = 1e-6;
    Ok(VariationalState {
        n_excitations: previous.n_excitations + 1,
        theta,
        lambdas,
        energy,
        lambdas_asymptotic: Vec::new(),
        boundary_hit: ln_lam - lo < edge || hi - ln_lam < edge,
        undercuts_band: energy < previous.energy - 2.0 * p.j,
        iterations,
    })
}

/// Lower bound states for `N_e = 1..=max_excitations`, with tail lengths.
pub fn ladder(p: &SystemParams, max_excitations: usize) -> Result<Vec<VariationalState>> {
    if max_excitations == 0 {
        return Err(Error::InvalidParam { name: "max_excitations", reason: "must be at least 1".into() });
    }
    let mut states = vec![single_photon_level(p)?];
    while states.len() < max_excitations {
        let next = minimize_level(p, states.last().expect("ladder is never empty"))?;
        states.push(next);
    }
    asymptotic_lengths(&mut states, p);
    Ok(states)
}

/// Upper ladder from the lower one at `δ → −δ`: the Hamiltonian maps to
/// minus itself under `a_x → (−1)^x a_x` together with `δ → −δ`.
pub fn ladder_upper(p: &SystemParams, max_excitations: usize) -> Result<Vec<VariationalState>> {
    let mut states = ladder(&p.mirrored(), max_excitations)?;
    for s in &mut states {
        s.energy = -s.energy;
    }
    Ok(states)
}

/// `cosh(1/λ̄_n) = (E^{(n−1)} − E^{(n)})/(2J)` with `E^{(0)} = 0`, so that
/// `Σ_n cosh(1/λ̄_n) = −E^{(N_e)}/(2J)` whenever every tail is bound.
pub fn asymptotic_lengths(states: &mut [VariationalState], p: &SystemParams) {
    let mut prev = 0.0;
    let mut tails = Vec::with_capacity(states.len());
    for s in states.iter_mut() {
        let rhs = (prev - s.energy) / (2.0 * p.j);
        tails.push((rhs > 1.0).then(|| 1.0 / rhs.acosh()));
        s.lambdas_asymptotic = tails.clone();
        prev = s.energy;
    }
}

/// `|n E^{(1)} − E^{(n)}| / (g |n − √n|)`.
pub fn nonlinearity(p: &SystemParams, states: &[VariationalState], n: usize) -> Result<f64> {
    if p.g <= 0.0 {
        return Err(domain("g", "the nonlinearity is undefined without coupling"));
    }
    if n < 2 {
        return Err(domain("n", "the nonlinearity needs n ≥ 2"));
    }
    let level = |k: usize| {
        states
            .iter()
            .find(|s| s.n_excitations == k)
            .map(|s| s.energy)
            .ok_or_else(|| domain("states", format!("level {k} missing")))
    };
    let nf = n as f64;
    Ok((nf * level(1)? - level(n)?).abs() / (p.g * (nf - nf.sqrt())))
}

/// Indices `k` where the atomic population does not increase from
/// level `k` to `k + 1`.
pub fn population_violations(states: &[VariationalState]) -> Vec<usize> {
    states
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].atomic_population() <= w[0].atomic_population())
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn brute_sums(lambdas: &[f64], j: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let r = (TRUNCATION * lambdas.iter().fold(0.0_f64, |m, &l| m.max(l))).ceil() as i64;
        let f = |n: usize, x: i64| (-(x.abs() as f64) / lambdas[n]).exp();
        let n = lambdas.len();
        let s = DMatrix::from_fn(n, n, |m, k| (-r..=r).map(|x| f(m, x) * f(k, x)).sum());
        let t = DMatrix::from_fn(n, n, |m, k| (-r..=r).map(|x| -j * f(m, x) * (f(k, x + 1) + f(k, x - 1))).sum());
        (s, t)
    }

    #[test]
    fn mode_sums_match_lattice_sums_and_closed_forms() {
        let lams = [0.7, 2.5, 11.0];
        let (s, t) = mode_sums(&lams, 0.5);
        let (sb, tb) = brute_sums(&lams, 0.5);
        for m in 0..3 {
            for k in 0..3 {
                assert_relative_eq!(s[(m, k)], sb[(m, k)], max_relative = 1e-12);
                assert_relative_eq!(t[(m, k)], tb[(m, k)], max_relative = 1e-12);
                let (a, b) = ((-1.0 / lams[m]).exp(), (-1.0 / lams[k]).exp());
                assert_relative_eq!(s[(m, k)], (1.0 + a * b) / (1.0 - a * b), max_relative = 1e-12);
                assert_relative_eq!(t[(m, k)], -(a + b) / (1.0 - a * b), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn single_photon_state_is_in_the_family() {
        let p = SystemParams::new(0.5, 0.2, 0.8);
        let (_, lo) = solve_bound_energies(&p).unwrap();
        let e = variational_energy(&p, lo.theta, &[lo.lambda]).unwrap();
        assert_relative_eq!(e, lo.energy, max_relative = 1e-12);
        let parts = variational_parts(&p, &[lo.lambda]).unwrap();
        assert_relative_eq!(parts.optimal_theta(), lo.theta, max_relative = 1e-10);
        assert_relative_eq!(parts.minimum(), lo.energy, max_relative = 1e-12);
    }

    #[test]
    fn pure_photon_angle() {
        let p = SystemParams::new(0.5, 0.0, 1.0);
        let parts = variational_parts(&p, &[1.3, 1.3]).unwrap();
        let e = variational_energy(&p, std::f64::consts::FRAC_PI_2, &[1.3, 1.3]).unwrap();
        assert_relative_eq!(e, parts.e_photon, max_relative = 1e-14);
        // Two photons in the same mode: twice the single-mode kinetic energy.
        let a = (-1.0f64 / 1.3).exp();
        assert_relative_eq!(parts.e_photon, 2.0 * (-2.0 * 0.5 * 2.0 * a / (1.0 + a * a)), max_relative = 1e-12);
    }

    #[test]
    fn product_tail_is_a_local_eigenfunction() {
        // Away from the atom, e^{−(|x|+|y|)/λ} has local energy −4J cosh(1/λ).
        let (j, lam) = (0.5, 2.2);
        let f = |x: i64, y: i64| (-((x.abs() + y.abs()) as f64) / lam).exp();
        for (x, y) in [(3, 5), (1, 1), (7, 2)] {
            let hop = f(x + 1, y) + f(x - 1, y) + f(x, y + 1) + f(x, y - 1);
            assert_relative_eq!(-j * hop / f(x, y), -4.0 * j * (1.0f64 / lam).cosh(), max_relative = 1e-13);
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        let p = SystemParams::new(0.5, 0.0, 1.0);
        assert!(variational_energy(&p, 0.3, &[1.0, -2.0]).is_err());
        assert!(variational_energy(&p, 0.3, &[]).is_err());
        assert!(variational_energy(&SystemParams::new(0.0, 0.0, 1.0), 0.3, &[1.0]).is_err());
    }

    #[test]
    fn ladder_is_decreasing_and_deterministic() {
        let p = SystemParams::new(0.5, 0.0, 1.0);
        let a = ladder(&p, 3).unwrap();
        let b = ladder(&p, 3).unwrap();
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert!(w[1].energy < w[0].energy - 2.0 * p.j);
            assert!(w[1].undercuts_band);
            assert!(!w[1].boundary_hit);
        }
        let sum: f64 = a[2].lambdas_asymptotic.iter().map(|l| (1.0 / l.unwrap()).cosh()).sum();
        assert_relative_eq!(sum, -a[2].energy / (2.0 * p.j), max_relative = 1e-12);
        assert_eq!(a[0].lambdas_asymptotic[0], Some(a[0].lambdas[0]));
    }

    #[test]
    fn strong_coupling_approaches_jaynes_cummings() {
        let p = SystemParams::new(0.5, 0.0, 10.0);
        let s = ladder(&p, 2).unwrap();
        assert!((s[1].energy / (-(2f64.sqrt()) * p.g) - 1.0).abs() < 0.02);
        let nl = nonlinearity(&p, &s, 2).unwrap();
        assert!(nl > 0.95 && nl <= 1.0, "{nl}");
    }

    #[test]
    fn loosely_bound_second_photon_at_lower_edge() {
        let ratio = |delta: f64| {
            let s = ladder(&SystemParams::new(0.5, delta, 0.04), 2).unwrap();
            let t = &s[1].lambdas_asymptotic;
            t[1].unwrap() / t[0].unwrap()
        };
        let (edge, centre) = (ratio(-1.0), ratio(0.0));
        assert!(edge > 2.5 && centre < 1.01, "{edge} {centre}");
    }

    #[test]
    fn upper_ladder_mirrors_lower() {
        let p = SystemParams::new(0.5, 0.3, 0.9);
        let up = ladder_upper(&p, 2).unwrap();
        let (upper, _) = solve_bound_energies(&p).unwrap();
        assert_relative_eq!(up[0].energy, upper.energy, max_relative = 1e-12);
        assert!(up[1].energy > up[0].energy + 2.0 * p.j);
    }

    #[test]
    fn nonlinearity_domain() {
        let p = SystemParams::new(0.5, 0.0, 1.0);
        let s = ladder(&p, 2).unwrap();
        assert!(nonlinearity(&p.with_g(0.0), &s, 2).is_err());
        assert!(nonlinearity(&p, &s, 1).is_err());
        assert!(nonlinearity(&p, &s, 3).is_err());
    }

    #[test]
    fn population_grows_along_the_ladder() {
        let p = SystemParams::new(0.5, 0.0, 1.0);
        let s = ladder(&p, 3).unwrap();
        assert!(population_violations(&s).is_empty());
    }
}
