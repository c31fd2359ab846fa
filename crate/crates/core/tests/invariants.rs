use num_complex::Complex64;
use proptest::prelude::*;
use wgqed_core::exact_diag::full_spectrum;
use wgqed_core::lattice::{build_hamiltonian, complex_group_velocity, dispersion, group_velocity};
use wgqed_core::markov::coupling_kernel;
use wgqed_core::multi_atom::{existence_classification, parity_factor, solve_two_atom, Parity, Regime};
use wgqed_core::numerics::poly;
use wgqed_core::single_photon::{atomic_population, pole_polynomial, poles, solve_bound_energies};
use wgqed_core::variational::ladder;
use wgqed_core::{Boundary, Branch, LatticeSpec, SystemParams};

fn lattice() -> impl Strategy<Value = LatticeSpec> {
    (4usize..9, prop::bool::ANY, 1usize..3).prop_flat_map(|(n, open, na)| {
        let boundary = if open { Boundary::Open } else { Boundary::Periodic };
        prop::collection::btree_set(0..n, na)
            .prop_map(move |s| LatticeSpec::new(n, boundary, s.into_iter().collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lossless_hamiltonian_is_hermitian(
        j in 0.1f64..2.0, delta in -3.0f64..3.0, g in 0.0f64..3.0,
        l in lattice(), ne in 1usize..3,
    ) {
        let h = build_hamiltonian(&SystemParams::new(j, delta, g), &l, ne, false).unwrap();
        prop_assert!(h.is_hermitian(1e-14));
        prop_assert!(h.is_real());
    }

    #[test]
    fn each_basis_state_keeps_its_excitation_number(
        j in 0.1f64..2.0, g in 0.1f64..3.0, l in lattice(), ne in 1usize..4,
    ) {
        let h = build_hamiltonian(&SystemParams::new(j, 0.3, g), &l, ne, false).unwrap();
        for b in &h.basis {
            prop_assert_eq!(b.atoms.count_ones() as usize + b.n_photons(), ne);
        }
    }

    #[test]
    fn bare_ring_has_the_cosine_spectrum(n in 3usize..40, j in 0.1f64..2.0) {
        let p = SystemParams::new(j, 0.0, 0.0);
        let l = LatticeSpec::new(n, Boundary::Periodic, vec![]).unwrap();
        let got = full_spectrum(&p, &l, 1).unwrap();
        let mut want: Vec<f64> = (0..n)
            .map(|m| dispersion(2.0 * std::f64::consts::PI * m as f64 / n as f64, &p))
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-12 * j);
        }
    }

    #[test]
    fn complex_group_velocity_reduces_in_band(j in 0.1f64..2.0, x in -0.999f64..0.999) {
        let p = SystemParams::new(j, 0.0, 1.0);
        let w = 2.0 * j * x;
        let v = complex_group_velocity(w, &p);
        let r = group_velocity(w, &p).unwrap();
        prop_assert!((v - Complex64::new(r, 0.0)).norm() <= 1e-14 * (2.0 * j));
    }

    #[test]
    fn lossless_kernel_modulus_in_band(j in 0.2f64..2.0, x in -0.95f64..0.95, g in 0.01f64..1.0, d in 1usize..20) {
        let p = SystemParams::new(j, 2.0 * j * x, g);
        let vg = group_velocity(p.delta, &p).unwrap();
        let a = coupling_kernel(&p, d).unwrap();
        let (gamma, u) = (2.0 * a.re, 2.0 * a.im);
        let want = 2.0 * g * g / vg.abs();
        prop_assert!(((gamma * gamma + u * u).sqrt() - want).abs() < 1e-10 * want);
    }

    #[test]
    fn bound_energies_solve_their_equation(x in 0.05f64..5.0, y in -3.0f64..3.0, j in 0.1f64..2.0) {
        let p = SystemParams::new(j, 2.0 * j * y, 2.0 * j * x);
        let (up, lo) = solve_bound_energies(&p).unwrap();
        prop_assert!(up.residual() < 1e-10 * j);
        prop_assert!(lo.residual() < 1e-10 * j);
        prop_assert!(up.energy > 2.0 * j && lo.energy < -2.0 * j);
        prop_assert!(atomic_population(&up) + atomic_population(&lo) < 1.0);
    }

    #[test]
    fn bound_states_mirror(x in 0.05f64..5.0, y in -3.0f64..3.0) {
        let p = SystemParams::new(0.5, y, x);
        let (up, lo) = solve_bound_energies(&p).unwrap();
        let (mup, mlo) = solve_bound_energies(&p.mirrored()).unwrap();
        prop_assert!((up.energy + mlo.energy).abs() < 1e-12 * up.energy.abs());
        prop_assert!((lo.energy + mup.energy).abs() < 1e-12 * lo.energy.abs());
        prop_assert!((atomic_population(&up) - atomic_population(&mlo)).abs() < 1e-10);
    }

    #[test]
    fn quartic_roots_obey_vieta(
        x in 0.05f64..3.0, y in -2.0f64..2.0, ga in 0.0f64..0.5, gc in 0.0f64..0.5,
    ) {
        let p = SystemParams::new(0.5, y, x).with_losses(ga, gc);
        let c = pole_polynomial(&p);
        let (ext, int) = poles(&p).unwrap();
        let sum: Complex64 = ext.iter().chain(&int).sum();
        let want = -c[3] / c[4];
        prop_assert!((sum - want).norm() < 1e-9 * (1.0 + want.norm()));
        for z in ext.iter().chain(&int) {
            let scale: f64 = c.iter().enumerate().map(|(k, a)| a.norm() * z.norm().powi(k as i32)).sum();
            prop_assert!(poly::eval(&c, *z).0.norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn parity_factors_sum_to_two(j in 0.2f64..2.0, e in 1.001f64..5.0, d in 0usize..40) {
        let p = SystemParams::new(j, 0.0, 1.0);
        for sign in [1.0, -1.0] {
            let en = sign * 2.0 * j * e;
            let even = parity_factor(Parity::Even, en, d, Regime::TwoAtoms, &p).unwrap();
            let odd = parity_factor(Parity::Odd, en, d, Regime::TwoAtoms, &p).unwrap();
            prop_assert!((even + odd - 2.0).abs() < 1e-14);
            prop_assert!(odd >= 0.0 && even <= 2.0);
        }
    }

    #[test]
    fn two_atom_mirror_and_ordering(x in 0.1f64..3.0, y in -1.5f64..1.5, d in 1usize..15) {
        let p = SystemParams::new(0.5, y, x);
        let (states, _) = solve_two_atom(&p, d).unwrap();
        let (mirrored, _) = solve_two_atom(&p.mirrored(), d).unwrap();
        let (up, lo) = solve_bound_energies(&p).unwrap();
        for s in &states {
            let m = mirrored.iter().find(|m| m.parity == s.parity && m.branch != s.branch).unwrap();
            prop_assert_eq!(s.exists, m.exists);
            if let (Some(a), Some(b)) = (s.energy, m.energy) {
                prop_assert!((a + b).abs() < 1e-11 * a.abs());
            }
            prop_assert!(s.residual() < 1e-10);
        }
        for (branch, single) in [(Branch::Upper, up.energy), (Branch::Lower, lo.energy)] {
            let e = |par| states.iter().find(|s| s.branch == branch && s.parity == par).unwrap().energy;
            if let (Some(even), Some(odd)) = (e(Parity::Even), e(Parity::Odd)) {
                // The outer state on each side is the one with factor 1 + e^{−d/λ}.
                let (outer, inner) = if branch == Branch::Upper { (even, odd) } else { (-even, -odd) };
                let s = branch.sign() * single;
                prop_assert!(outer >= s - 1e-12 && s >= inner - 1e-12);
            }
        }
    }

    #[test]
    fn existence_is_monotone_in_distance(x in 0.05f64..2.0, y in -1.5f64..1.5) {
        let p = SystemParams::new(0.5, y, x);
        let mut seen = (false, false);
        for d in 1..40 {
            let r = existence_classification(&p, d);
            prop_assert!(r.upper_odd_exists || !seen.0);
            prop_assert!(r.lower_odd_exists || !seen.1);
            seen = (r.upper_odd_exists, r.lower_odd_exists);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ladder_is_deterministic(x in 0.2f64..2.0, edge in prop::bool::ANY) {
        let p = SystemParams::new(0.5, if edge { -1.0 } else { 0.0 }, x);
        let a = ladder(&p, 3).unwrap();
        let b = ladder(&p, 3).unwrap();
        for (s, t) in a.iter().zip(&b) {
            prop_assert_eq!(s.energy.to_bits(), t.energy.to_bits());
            prop_assert_eq!(s.theta.to_bits(), t.theta.to_bits());
            prop_assert_eq!(&s.lambdas, &t.lambdas);
        }
        for w in a.windows(2) {
            prop_assert!(w[1].energy < w[0].energy);
        }
    }
}
