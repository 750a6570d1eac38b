use hokdv_core::flow::{integrate, linear_propagate, FlowSpec, Scheme};
use hokdv_core::resonance::{p_n, prefactor, q_n, FreqTuple};
use hokdv_core::spectral::transform::{inverse, transform};
use hokdv_core::spectral::{conserved_quantities, FourierField, GridSpec};
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn field(j: u32, coeffs: Vec<(f64, f64)>) -> FourierField {
    let grid = GridSpec::periodic(j, coeffs.len()).unwrap();
    FourierField::from_coeffs(grid, coeffs.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

fn coeffs(k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<(f64, f64)>> {
    k.prop_flat_map(|k| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn samples_round_trip(j in 1u32..4, c in coeffs(1..=24)) {
        let u = field(j, c);
        let back = inverse(&transform(&u), u.grid()).unwrap();
        for (a, b) in u.coeffs().iter().zip(back.coeffs()) {
            prop_assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn free_evolution_is_an_isometric_group(j in 1u32..4, c in coeffs(1..=16), s in -2.0f64..2.0, t in -1.0f64..1.0, t2 in -1.0f64..1.0) {
        let u = field(j, c);
        let v = linear_propagate(&u, t);
        prop_assert!(close(u.sobolev_norm(s), v.sobolev_norm(s), 1e-13));
        let two = linear_propagate(&v, t2);
        let once = linear_propagate(&u, t + t2);
        // rounding of the largest phase dominates
        let tol = 1e-15 * u.grid().dispersion(u.grid().k_max() as i64).abs() * 4.0 + 1e-14;
        for (a, b) in two.coeffs().iter().zip(once.coeffs()) {
            prop_assert!((a - b).norm() < tol);
        }
    }

    #[test]
    fn symplectic_form_is_antisymmetric_and_preserved(
        j in 1u32..4,
        pair in (1usize..12).prop_flat_map(|k| (coeffs(k..=k), coeffs(k..=k))),
        t in -1.0f64..1.0,
    ) {
        let (u, v) = (field(j, pair.0), field(j, pair.1));
        let uv = u.symplectic_form(&v).unwrap();
        prop_assert!(close(uv, -v.symplectic_form(&u).unwrap(), 1e-14));
        prop_assert!(u.symplectic_form(&u).unwrap().abs() < 1e-14);
        let moved = linear_propagate(&u, t).symplectic_form(&linear_propagate(&v, t)).unwrap();
        prop_assert!(close(uv, moved, 1e-12));
    }

    #[test]
    fn parseval_for_the_l2_pairing(j in 1u32..4, c in coeffs(1..=16)) {
        let u = field(j, c);
        let n = u.sobolev_norm(0.0);
        prop_assert!(close(n * n, u.inner(&u).unwrap(), 1e-13));
        prop_assert!(close(n * n, conserved_quantities(&u, 0.0).l2_energy, 1e-13));
    }

    #[test]
    fn three_term_cofactor_is_a_positive_integer(j in 1u32..5, x in -40i64..40, y in -40i64..40) {
        prop_assume!(x != 0 && y != 0 && x + y != 0);
        let t = FreqTuple::integers(&[x, y, -x - y], j).unwrap();
        let q = q_n(&t).unwrap();
        prop_assert!(q.is_integer());
        prop_assert!(q.is_positive());
        prop_assert_eq!(prefactor(&t).unwrap() * &q, p_n(&t));
        if j == 1 {
            prop_assert_eq!(q.to_integer(), 3.into());
        }
    }

    #[test]
    fn four_term_cofactor_vanishes_nowhere_off_the_resonant_set(j in 1u32..4, x in -24i64..24, y in -24i64..24, z in -24i64..24) {
        let w = -x - y - z;
        prop_assume!(x != 0 && y != 0 && z != 0 && w != 0);
        let t = FreqTuple::integers(&[x, y, z, w], j).unwrap();
        if prefactor(&t).unwrap().is_zero() {
            prop_assert!(p_n(&t).is_zero());
        } else {
            let q = q_n(&t).unwrap();
            prop_assert!(!q.is_zero());
            prop_assert!(q.is_integer());
        }
    }

    #[test]
    fn snapshot_round_trip_is_exact(j in 1u32..4, c in coeffs(1..=12), scale in -300i32..300) {
        let f = 10f64.powi(scale);
        let u = field(j, c.into_iter().map(|(a, b)| (a * f, b * f)).collect());
        let back = hokdv_core::snapshot::parse(&hokdv_core::snapshot::render(&u)).unwrap();
        prop_assert_eq!(back.coeffs(), u.coeffs());
        prop_assert_eq!(back.grid().j(), j);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn midpoint_flow_keeps_mass_and_l2(j in 1u32..3, c in coeffs(2..=6), amp in 0.05f64..1.0) {
        let u = field(j, c).scale(amp);
        let spec = FlowSpec::new(*u.grid(), 1e-3, 2e-2).unwrap().with_scheme(Scheme::FilonMidpoint);
        let traj = integrate(&u, &spec).unwrap();
        let start = conserved_quantities(&u, 0.0);
        let end = conserved_quantities(traj.last(), 0.0);
        prop_assert!(end.mass.abs() < 1e-14);
        prop_assert!(close(start.l2_energy, end.l2_energy, 1e-10));
    }
}
