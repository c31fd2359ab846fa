//! Quick oracle-equivalence checks run by `wgqed selftest`.

use crate::output::{Cell, Table};
use wgqed_core::exact_diag::{diagonalize_sector, full_spectrum};
use wgqed_core::lattice::build_hamiltonian;
use wgqed_core::markov::{coupling_kernel, kernel_by_quadrature};
use wgqed_core::multi_atom::{metaband_edges, multi_atom_exact_band, solve_two_atom};
use wgqed_core::single_photon::{
    excitation_spectrum, mirror_identities_check, resolvent_spectrum_oracle, solve_bound_energies,
};
use wgqed_core::variational::ladder;
use wgqed_core::{Boundary, LatticeSpec, Result, SystemParams};

struct Check {
    name: &'static str,
    tolerance: f64,
    measure: fn() -> Result<f64>,
}

fn bound_states_vs_exact() -> Result<f64> {
    let p = SystemParams::new(0.5, 0.3, 0.8);
    let (up, lo) = solve_bound_energies(&p)?;
    let n = (40.0 * up.lambda.max(lo.lambda)) as usize + 20;
    let sol = diagonalize_sector(&p, &LatticeSpec::single_atom_ring(n), 1, 1)?;
    Ok((sol.highest[0].energy - up.energy).abs().max((sol.lowest[0].energy - lo.energy).abs()) / p.j)
}

fn kernel_vs_quadrature() -> Result<f64> {
    let p = SystemParams::new(0.5, 0.6, 0.1).with_losses(0.0, 0.14);
    let mut worst: f64 = 0.0;
    for d in 0..4 {
        let a = coupling_kernel(&p, d)?;
        worst = worst.max((a - kernel_by_quadrature(&p, d)?).norm() / a.norm());
    }
    Ok(worst)
}

fn spectrum_vs_resolvent() -> Result<f64> {
    let p = SystemParams::new(0.5, 0.0, 0.5).with_losses(0.1, 0.2);
    let omegas = [-1.2, -0.6, 0.0, 0.4, 1.1];
    let a = excitation_spectrum(&p, &omegas)?;
    let b = resolvent_spectrum_oracle(&p, &LatticeSpec::single_atom_ring(400), &omegas)?;
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs() / x.abs()).fold(0.0, f64::max))
}

fn variational_gap() -> Result<f64> {
    let p = SystemParams::new(0.5, 0.0, 1.0);
    let var = ladder(&p, 2)?[1].energy;
    let exact = diagonalize_sector(&p, &LatticeSpec::single_atom_ring(40), 2, 1)?.lowest[0].energy;
    // Negative when the upper-bound property is violated.
    let gap = (var - exact) / exact.abs();
    Ok(if gap < -1e-9 { f64::INFINITY } else { gap.abs() })
}

fn two_atom_vs_exact() -> Result<f64> {
    let p = SystemParams::new(0.5, 0.2, 0.7);
    let d = 3;
    let (states, _) = solve_two_atom(&p, d)?;
    let l = LatticeSpec::new(2 * 60 + d + 1, Boundary::Open, vec![60, 60 + d])?;
    let w = full_spectrum(&p, &l, 1)?;
    Ok(states
        .iter()
        .filter_map(|s| s.energy)
        .map(|e| w.iter().map(|x| (x - e).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        / p.j)
}

fn melting_consistency() -> Result<f64> {
    // solve_two_atom fails with Inconsistent on any disagreement.
    for i in 0..12 {
        for k in 0..12 {
            let p = SystemParams::new(0.5, -1.5 + 3.0 * i as f64 / 11.0, 0.05 + 2.0 * k as f64 / 11.0);
            for d in 1..=6 {
                solve_two_atom(&p, d)?;
            }
        }
    }
    Ok(0.0)
}

fn metaband_vs_exact() -> Result<f64> {
    let p = SystemParams::new(0.5, 0.6, 1.0);
    let (up, lo) = metaband_edges(&p, 4)?;
    let band = multi_atom_exact_band(&p, &LatticeSpec::equally_spaced_open(20, 4, 30))?;
    let (hi, _) = band.upper_extremes().unwrap_or((f64::NAN, f64::NAN));
    let (_, low) = band.lower_extremes().unwrap_or((f64::NAN, f64::NAN));
    let err = (hi - up.e_upper_edge.unwrap_or(f64::NAN)).abs().max((low - lo.e_lower_edge.unwrap_or(f64::NAN)).abs());
    Ok(if err.is_nan() { f64::INFINITY } else { err / p.j })
}

fn hermiticity() -> Result<f64> {
    let p = SystemParams::new(0.7, 0.3, 1.1);
    let h = build_hamiltonian(&p, &LatticeSpec::new(8, Boundary::Periodic, vec![0, 3])?, 2, false)?;
    Ok(if h.is_hermitian(1e-14) { 0.0 } else { 1.0 })
}

fn mirror_identities() -> Result<f64> {
    let ok = [(0.0, 0.4), (0.7, 1.3), (-1.4, 0.2)]
        .iter()
        .all(|&(d, g)| mirror_identities_check(&SystemParams::new(0.5, d, g)));
    Ok(if ok { 0.0 } else { 1.0 })
}

const CHECKS: &[Check] = &[
    Check { name: "bound_states_vs_exact", tolerance: 1e-6, measure: bound_states_vs_exact },
    Check { name: "kernel_vs_quadrature", tolerance: 1e-6, measure: kernel_vs_quadrature },
    Check { name: "spectrum_vs_resolvent", tolerance: 1e-3, measure: spectrum_vs_resolvent },
    Check { name: "variational_upper_bound", tolerance: 1e-2, measure: variational_gap },
    Check { name: "two_atom_vs_exact", tolerance: 1e-6, measure: two_atom_vs_exact },
    Check { name: "melting_consistency", tolerance: 0.0, measure: melting_consistency },
    Check { name: "metaband_vs_exact", tolerance: 2e-2, measure: metaband_vs_exact },
    Check { name: "hamiltonian_hermitian", tolerance: 0.0, measure: hermiticity },
    Check { name: "mirror_identities", tolerance: 0.0, measure: mirror_identities },
];

/// Runs every check; one row per check with its measured deviation.
pub fn run() -> Table {
    let mut t = Table::new(&["check", "status", "deviation", "tolerance"]);
    let mut failed = 0;
    for c in CHECKS {
        let (status, dev) = match (c.measure)() {
            Ok(v) if v <= c.tolerance => ("pass", Cell::Num(v)),
            Ok(v) => ("fail", Cell::Num(v)),
            Err(e) => ("fail", Cell::Text(e.to_string().replace(',', ";"))),
        };
        failed += usize::from(status == "fail");
        t.push(vec![c.name.into(), status.into(), dev, c.tolerance.into()]);
    }
    t.meta("command", "selftest");
    t.meta("passed", CHECKS.len() - failed);
    t.meta("failed", failed);
    t
}

pub fn failures(t: &Table) -> usize {
    t.rows.iter().filter(|r| r[1] == Cell::Text("fail".into())).count()
}
