//! One runner per subcommand. Each sweep point is computed independently
//! and rows are emitted in sweep order.

use crate::config::{Command, RunConfig, SweepField};
use crate::error::CliError;
use crate::output::{format_float, Cell, Table};
use crate::selftest;
use wgqed_core::exact_diag::{classify_with_margin, diagonalize_sector, extract_decay_length, TwoPhotonSolution};
use wgqed_core::markov::{markov_validity, rate_matrices};
use wgqed_core::multi_atom::{dressed_dipole_coupling, metaband_edges, solve_two_atom, MetaBand};
use wgqed_core::single_photon::{atomic_population, excitation_spectrum, solve_bound_energies};
use wgqed_core::variational::{asymptotic_lengths, ladder, nonlinearity};
use wgqed_core::{par, Branch, Exec, LatticeSpec, SystemParams};

type Rows = Vec<Vec<Cell>>;

/// Parameters of one sweep point.
#[derive(Debug, Clone, Copy)]
struct Point {
    value: Option<f64>,
    params: SystemParams,
    spacing: Option<usize>,
}

fn points(cfg: &RunConfig) -> Result<Vec<Point>, CliError> {
    let Some(sweep) = cfg.sweep else {
        return Ok(vec![Point { value: None, params: cfg.params, spacing: cfg.spacing }]);
    };
    sweep
        .values()
        .into_iter()
        .map(|v| {
            let mut p = cfg.params;
            let mut spacing = cfg.spacing;
            match sweep.field {
                SweepField::J => p.j = v,
                SweepField::Delta => p.delta = v,
                SweepField::G => p.g = v,
                SweepField::GammaA => p.gamma_a = v,
                SweepField::GammaC => p.gamma_c = v,
                SweepField::Spacing => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(wgqed_core::Error::InvalidParam {
                            name: "spacing",
                            reason: format!("sweep value {v} is not a positive integer"),
                        }
                        .into());
                    }
                    spacing = Some(v as usize);
                }
            }
            Ok(Point { value: Some(v), params: p, spacing })
        })
        .collect()
}

fn header(cfg: &RunConfig, t: &mut Table) {
    t.meta("tool", format!("wgqed {}", env!("CARGO_PKG_VERSION")));
    t.meta("command", cfg.command.name());
    t.meta("units", cfg.units.name());
    let p = &cfg.params;
    for (k, v) in [("J", p.j), ("delta", p.delta), ("g", p.g), ("gamma_a", p.gamma_a), ("gamma_c", p.gamma_c)] {
        t.meta(k, v);
    }
    if let Some(s) = &cfg.sweep {
        t.meta("sweep", s);
    }
}

/// Runs the configured command and returns its table.
pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    if cfg.command == Command::Selftest {
        // Failures are reported in the table; the caller decides the exit status.
        let mut t = selftest::run();
        t.metadata.insert(0, ("tool".into(), format!("wgqed {}", env!("CARGO_PKG_VERSION"))));
        return Ok(t);
    }
    let (columns, runner): (&[&str], fn(&RunConfig, &Point) -> Result<Rows, CliError>) = match cfg.command {
        Command::Rates => (&["i", "j", "distance", "gamma", "u", "markov_ratio", "markov_valid"], rates),
        Command::Bound1 => (&["branch", "energy", "lambda", "theta", "atomic_population"], bound1),
        Command::Spectrum => (&["omega", "s_a"], spectrum),
        Command::TwoPhoton => (&["index", "energy", "tag", "decay_length"], twophoton),
        Command::Ladder => (
            &["n", "energy", "theta", "atomic_population", "lambda", "tail_length", "nonlinearity", "boundary_hit"],
            ladder_rows,
        ),
        Command::TwoAtom => (&["d", "branch", "parity", "exists", "energy", "lambda", "theta", "u_dd"], twoatom),
        Command::Metaband => (&["dx", "upper_top", "upper_bottom", "lower_top", "lower_bottom", "melted"], metaband),
        Command::Selftest => unreachable!(),
    };
    let pts = points(cfg)?;
    let mut cols: Vec<&str> = Vec::new();
    if let Some(s) = &cfg.sweep {
        cols.push(s.field.name());
    }
    cols.extend_from_slice(columns);
    let mut table = Table::new(&cols);
    header(cfg, &mut table);
    extra_header(cfg, &mut table)?;
    for (pt, rows) in pts.iter().zip(par::map(Exec::default(), &pts, |pt| runner(cfg, pt))) {
        for mut row in rows? {
            if let Some(v) = pt.value {
                row.insert(0, v.into());
            }
            table.push(row);
        }
    }
    Ok(table)
}

fn extra_header(cfg: &RunConfig, t: &mut Table) -> Result<(), CliError> {
    match cfg.command {
        Command::Spectrum => {
            if cfg.params.gamma_a == 0.0 {
                t.meta("warning", "gamma_a = 0: unnormalized spectral shape");
            }
            if cfg.sweep.is_none() {
                let r = excitation_spectrum(&cfg.params, &[])?;
                let s = cfg.units.scale(cfg.params.j);
                let fmt = |z: &[num_complex::Complex64]| {
                    z.iter()
                        .map(|z| {
                            // Drop root-finder noise far below the pole's magnitude.
                            let clean = |x: f64| if x.abs() < 1e-12 * z.norm() / s { 0.0 } else { x };
                            let (re, im) = (clean(z.re / s), clean(z.im / s));
                            let sign = if im < 0.0 { '-' } else { '+' };
                            format!("{}{sign}{}i", format_float(re), format_float(im.abs()))
                        })
                        .collect::<Vec<_>>()
                        .join(";")
                };
                t.meta("poles_external", fmt(&r.poles_external));
                t.meta("poles_internal", fmt(&r.poles_internal));
            }
        }
        Command::TwoPhoton => t.meta("n_sites", twophoton_sites(cfg)),
        Command::Rates => t.meta("boundary", format!("{:?}", cfg.boundary).to_lowercase()),
        _ => {}
    }
    Ok(())
}

fn scale(cfg: &RunConfig, p: &SystemParams) -> f64 {
    cfg.units.scale(p.j)
}

fn rates(cfg: &RunConfig, pt: &Point) -> Result<Rows, CliError> {
    let positions = match (&cfg.atoms, cfg.n_atoms, pt.spacing) {
        (_, Some(n), Some(s)) => (0..n).map(|i| i * s).collect(),
        (Some(a), _, _) => a.clone(),
        _ => {
            return Err(wgqed_core::Error::InvalidParam {
                name: "atoms",
                reason: "rates needs atoms=… or n_atoms=… with spacing=…".into(),
            }
            .into())
        }
    };
    let n_sites = cfg.n_sites.unwrap_or(positions.iter().max().map_or(1, |m| m + 1));
    let lattice = LatticeSpec::new(n_sites, cfg.boundary, positions)?;
    let p = &pt.params;
    let cm = rate_matrices(p, &lattice)?;
    let diag = markov_validity(p, &lattice, cfg.threshold);
    let s = scale(cfg, p);
    let x = &lattice.atom_positions;
    let mut rows = Vec::new();
    for i in 0..x.len() {
        for j in i..x.len() {
            rows.push(vec![
                i.into(),
                j.into(),
                lattice.distance(x[i], x[j]).into(),
                (cm.gamma[(i, j)] / s).into(),
                (cm.u[(i, j)] / s).into(),
                diag.single_atom_ratio.max(diag.retardation_ratio).into(),
                diag.valid.into(),
            ]);
        }
    }
    Ok(rows)
}

fn bound1(cfg: &RunConfig, pt: &Point) -> Result<Rows, CliError> {
    let (up, lo) = solve_bound_energies(&pt.params)?;
    let s = scale(cfg, &pt.params);
    Ok([up, lo]
        .iter()
        .map(|b| {
            vec![
                b.branch.name().into(),
                (b.energy / s).into(),
                b.lambda.into(),
                b.theta.into(),
                atomic_population(b).into(),
            ]
        })
        .collect())
}

fn spectrum(cfg: &RunConfig, pt: &Point) -> Result<Rows, CliError> {
    let p = &pt.params;
    let (lo, hi, n) = cfg.omega.unwrap_or_else(|| {
        let w = 2.0 * p.j + 2.0 * p.g + p.delta.abs();
        (-w, w, 401)
    });
    let omegas: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let r = excitation_spectrum(p, &omegas)?;
    let s = scale(cfg, p);
    Ok(r.omegas.iter().zip(&r.values).map(|(w, v)| vec![(w / s).into(), (*v).into()]).collect())
}

fn twophoton_sites(cfg: &RunConfig) -> usize {
    cfg.n_sites.unwrap_or(60)
}

fn twophoton(cfg: &RunConfig, pt: &Point) -> Result<Rows, CliError> {
    let p = &pt.params;
    let lattice = LatticeSpec::single_atom_ring(twophoton_sites(cfg));
    let sol = diagonalize_sector(p, &lattice, 2, cfg.k)?;
    let dim = sol.basis.len();
    let lowest: Vec<f64> = sol.lowest.iter().map(|e| e.energy).collect();
    let mut energies = lowest.clone();
    energies.extend(sol.highest.iter().rev().map(|e| e.energy).filter(|e| lowest.iter().all(|l| l != e)));
    let span = sol.highest[0].energy - sol.lowest[0].energy;
    let margin = if dim > 1 { 3.0 * span / (dim - 1) as f64 } else { 0.0 };
    let classes = classify_with_margin(&energies, p, margin)?;
    let ground =
        TwoPhotonSolution::from_eigenvector(&lattice, &sol.basis, sol.lowest[0].energy, &sol.lowest[0].vector)?;
    let decay = extract_decay_length(&ground).ok().map(|f| f.lambda);
    let s = scale(cfg, p);
    Ok(energies
        .iter()
        .zip(&classes.tags)
        .enumerate()
        .map(|(i, (e, tag))| {
            let index = if i < lowest.len() { i } else { dim - (energies.len() - i) };
            vec![index.into(), (e / s).into(), tag.name().into(), if i == 0 { decay.into() } else { Cell::Empty }]
        })
        .collect())
}

fn ladder_rows(cfg: &RunConfig, pt: &Point) -> Result<Rows, CliError> {
    let p = &pt.params;
    let mut states = ladder(p, cfg.max_excitations)?;
    asymptotic_lengths(&mut states, p);
    let s = scale(cfg, p);
    states
        .iter()
        .map(|st| {
            let n = st.n_excitations;
            let nl = if n >= 2 { Some(nonlinearity(p, &states, n)?) } else { None };
            Ok(vec![
                n.into(),
                (st.energy / s).into(),
                st.theta.into(),
                st.atomic_population().into(),
                st.lambdas.last().copied().into(),
                st.lambdas_asymptotic.last().copied().flatten().into(),
                nl.into(),
                st.boundary_hit.into(),
            ])
        })
        .collect()
}

fn twoatom(cfg: &RunConfig, pt: &Point) -> Result<Rows, CliError> {
    let p = &pt.params;
    let ds: Vec<usize> = match pt.spacing.filter(|_| cfg.sweep.is_some_and(|s| s.field == SweepField::Spacing)) {
        Some(d) => vec![d],
        None => (cfg.d_range.0..=cfg.d_range.1).collect(),
    };
    let s = scale(cfg, p);
    let mut rows = Vec::new();
    for d in ds {
        let (states, _) = solve_two_atom(p, d)?;
        let u_dd = dressed_dipole_coupling(p, d).ok().map(|u| u / s);
        for st in &states {
            rows.push(vec![
                d.into(),
                st.branch.name().into(),
                st.parity.name().into(),
                st.exists.into(),
                st.energy.map(|e| e / s).into(),
                st.lambda.into(),
                st.theta.into(),
                u_dd.into(),
            ]);
        }
    }
    Ok(rows)
}

fn metaband(cfg: &RunConfig, pt: &Point) -> Result<Rows, CliError> {
    let p = &pt.params;
    let dxs: Vec<usize> = match pt.spacing.filter(|_| cfg.sweep.is_some_and(|s| s.field == SweepField::Spacing)) {
        Some(d) => vec![d],
        None => (cfg.dx_range.0..=cfg.dx_range.1).collect(),
    };
    let s = scale(cfg, p);
    let e =
        |b: &MetaBand, top: bool| -> Cell { if top { b.e_upper_edge } else { b.e_lower_edge }.map(|e| e / s).into() };
    dxs.into_iter()
        .map(|dx| {
            let (up, lo) = metaband_edges(p, dx)?;
            debug_assert_eq!((up.branch, lo.branch), (Branch::Upper, Branch::Lower));
            Ok(vec![
                dx.into(),
                e(&up, true),
                e(&up, false),
                e(&lo, true),
                e(&lo, false),
                format!("{}/{}", up.melted.name(), lo.melted.name()).into(),
            ])
        })
        .collect()
}
