use proptest::prelude::*;

use kzbraid::checks::random_configurations;
use kzbraid::cli::parse_braid_word;
use kzbraid::equivalence::ratio_multiset_deviation;
use kzbraid::holonomy::{BraidLetter, BraidWord};
use kzbraid::kz_connection::{flatness_residual, ConnectionCoefficients};
use kzbraid::lie_core::{build_su_basis, pairing};
use kzbraid::linalg::{c64, commutator, frob, identity, C64};
use kzbraid::loopspace::{make_loop, random_loop_data, symplectic_form, FourierMode, TangentLoop};
use kzbraid::rmatrix::{braid_rep_word, build_r, qybe_residual, rcheck_relations, QDeformation};

fn word_strategy(max_index: usize, max_len: usize) -> impl Strategy<Value = BraidWord> {
    prop::collection::vec((1..=max_index, prop::bool::ANY), 0..max_len)
        .prop_map(|v| BraidWord::new(v.into_iter().map(|(i, s)| BraidLetter::new(i, if s { 1 } else { -1 })).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_parse_round_trip(w in word_strategy(12, 10)) {
        prop_assert_eq!(parse_braid_word(&w.to_string()).unwrap(), w);
    }

    #[test]
    fn parser_never_panics(text in "[s0-9^ \\-x]{0,16}") {
        let _ = parse_braid_word(&text);
    }

    #[test]
    fn exponent_expansion(i in 1usize..20, e in 1i64..6, neg in prop::bool::ANY) {
        let e = if neg { -e } else { e };
        let w = parse_braid_word(&format!("s{i}^{e}")).unwrap();
        prop_assert_eq!(w.len() as i64, e.abs());
        prop_assert_eq!(w.exponent_sum(), e);
        prop_assert!(w.letters().iter().all(|l| l.index == i));
    }

    #[test]
    fn yang_baxter_any_level(rank in 2usize..=3, level in 1u32..60) {
        let rm = build_r(rank, QDeformation::su(rank, level)).unwrap();
        prop_assert!(qybe_residual(&rm) <= 1e-12);
        let rel = rcheck_relations(&rm);
        prop_assert!(rel.quadratic <= 1e-12 && rel.braided_ybe <= 1e-12);
    }

    #[test]
    fn word_times_inverse_is_identity(w in word_strategy(3, 8), level in 1u32..8) {
        let rm = build_r(2, QDeformation::su(2, level)).unwrap();
        let a = braid_rep_word(&rm, 4, &w).unwrap();
        let b = braid_rep_word(&rm, 4, &w.inverse()).unwrap();
        prop_assert!(frob(&(b * a - identity(16))) <= 1e-11);
    }

    #[test]
    fn ratios_ignore_scalars(level in 1u32..8, r in 0.2f64..5.0, phi in -3.1f64..3.1) {
        let rm = build_r(2, QDeformation::su(2, level)).unwrap();
        let nu = braid_rep_word(&rm, 3, &BraidWord::new(vec![BraidLetter::new(1, 1)])).unwrap();
        let scaled = &nu * C64::from_polar(r, phi);
        prop_assert!(ratio_multiset_deviation(&scaled, &nu).unwrap() <= 1e-12);
    }

    #[test]
    fn pairing_is_invariant(rank in 2usize..=3, seed in prop::collection::vec(-1.0f64..1.0, 24)) {
        let basis = build_su_basis(rank).unwrap();
        let d = basis.dim();
        let elem = |off: usize| basis.from_coordinates(&(0..d).map(|a| c64(seed[(off + a) % seed.len()], 0.0)).collect::<Vec<_>>());
        let (x, y, z) = (elem(0), elem(7), elem(13));
        let lhs = pairing(&commutator(&x, &y), &z);
        let rhs = pairing(&x, &commutator(&y, &z));
        prop_assert!((lhs - rhs).norm() <= 1e-14);
        prop_assert!((pairing(&x, &y) - pairing(&y, &x)).norm() <= 1e-15);
    }

    #[test]
    fn analytic_flatness_anywhere(n in 2usize..=4, level in 1u32..7, seed in any::<u64>()) {
        let cfg = ConnectionCoefficients::su(2, n, level).unwrap();
        let z = random_configurations(n, 1, seed).unwrap().remove(0);
        prop_assert!(flatness_residual(&cfg, &z, None).unwrap().max_analytic() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn symplectic_form_is_antisymmetric(seed in any::<u64>(), a in 0usize..3, b in 0usize..3, m1 in 1u32..5, m2 in 1u32..5) {
        let basis = build_su_basis(2).unwrap();
        let lp = make_loop(&basis, &random_loop_data(&basis, seed, 2, 0.4, seed % 2 == 0), 128).unwrap();
        let g = |i: usize| basis.generator(i).clone();
        let u = TangentLoop::trigonometric(128, &[FourierMode { m: m1, cos: g(a), sin: g(b) }]);
        let v = TangentLoop::trigonometric(128, &[FourierMode { m: m2, cos: g(b), sin: g((a + 1) % 3) }]);
        let uv = symplectic_form(&lp, &u, &v).unwrap();
        let vu = symplectic_form(&lp, &v, &u).unwrap();
        prop_assert!((uv + vu).norm() <= 1e-13);
    }
}
