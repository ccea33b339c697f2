use hurwitz_moments::arith::primes::factorize;
use hurwitz_moments::arith::{beta_ell, d_ell, d_k, smooth_numbers, ExponentTuple};
use hurwitz_moments::characters::character_group;
use hurwitz_moments::constants::{c_ell_q, c_k_alpha};
use hurwitz_moments::lfun::hurwitz_zeta;
use hurwitz_moments::moments::{diagonal_prediction, hurwitz_moment, mean_square, QuadratureSpec};
use hurwitz_moments::rmt::{model_moment, model_prediction};
use num_complex::Complex64;
use num_integer::Integer;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characters_are_multiplicative_and_periodic(q in 1u64..200, a in 1u64..1000, b in 1u64..1000, i in 0usize..1000) {
        let g = character_group(q).unwrap();
        let chi = &g.characters()[i % g.len()];
        let (va, vb) = (chi.value(a), chi.value(b));
        prop_assert!((chi.value(a * b) - va * vb).norm() < 1e-9);
        prop_assert!((chi.value(a + q) - va).norm() < 1e-12);
        let expected = if a.gcd(&q) == 1 { 1.0 } else { 0.0 };
        prop_assert!((va.norm() - expected).abs() < 1e-12);
        let prod = chi.mul(&chi.conj()).unwrap();
        prop_assert!(prod.is_principal());
    }

    #[test]
    fn d_ell_is_multiplicative_and_bounded(q in 1u64..13, m in 1u64..300, n in 1u64..300, seed in 0u64..1000) {
        let g = character_group(q).unwrap();
        let k = 1 + (seed % 3) as u32;
        let tuples = ExponentTuple::all_with_weight(&g, k);
        let ell = &tuples[(seed as usize / 3) % tuples.len()];
        let dm = d_ell(ell, m);
        prop_assert!(dm.norm() <= d_k(k, m) as f64 + 1e-9);
        if m.gcd(&n) == 1 {
            prop_assert!((d_ell(ell, m * n) - dm * d_ell(ell, n)).norm() < 1e-8);
        }
    }

    #[test]
    fn divisor_function_recursion(k in 2u32..5, n in 1u64..2000) {
        let lhs = d_k(k, n);
        let rhs: u64 = (1..=n).filter(|d| n % d == 0).map(|d| d_k(k - 1, d)).sum();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn smooth_numbers_are_smooth(q in 1u64..20, x in 2.0f64..40.0) {
        for n in smooth_numbers(q, x, 3000) {
            prop_assert!(n.gcd(&q) == 1);
            prop_assert!(factorize(n).iter().all(|(p, _)| (*p as f64) <= x));
        }
    }

    #[test]
    fn hurwitz_duplication(alpha in 0.01f64..1.0, t in 0.0f64..200.0) {
        let s = Complex64::new(0.5, t);
        let lhs = hurwitz_zeta(s, alpha / 2.0, 1e-12).unwrap().value
            + hurwitz_zeta(s, (alpha + 1.0) / 2.0, 1e-12).unwrap().value;
        let rhs = (s * 2f64.ln()).exp() * hurwitz_zeta(s, alpha, 1e-12).unwrap().value;
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn mean_square_scales_exactly(c in 0.1f64..10.0, w in 0.0f64..5.0) {
        let spec = QuadratureSpec { panel_width: 1.0, ..QuadratureSpec::default() };
        let f = move |t: f64| Ok(Complex64::new((w * t).cos(), 0.3));
        let a = mean_square(f, 20.0, &spec).unwrap();
        let b = mean_square(move |t| Ok(f(t)? * c), 20.0, &spec).unwrap();
        prop_assert!(a.value >= 0.0);
        prop_assert!((b.value - c * c * a.value).abs() <= 1e-12 * b.value);
    }

    #[test]
    fn model_is_deterministic(seed in 0u64..1000, n in 1usize..12) {
        let a = model_moment(1, n, 20.0, 40, seed).unwrap();
        let b = model_moment(1, n, 20.0, 40, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.mean > 0.0);
        prop_assert!((a.std_error - a.std_error.abs()).abs() == 0.0);
    }

    #[test]
    fn prediction_scales_as_power(m in 1u32..4, n in 1usize..50, x in 3.0f64..1e6) {
        let a = model_prediction(m, n, x).unwrap();
        let b = model_prediction(m, 2 * n, x).unwrap();
        prop_assert_eq!(b / a, 2f64.powi((m * m) as i32));
    }
}

#[test]
fn c_k_alpha_ignores_numerator() {
    for q in 1..=30u64 {
        let units: Vec<u64> = (1..=q).filter(|a| a.gcd(&q) == 1).collect();
        for k in 1..=3 {
            let first = c_k_alpha(k, units[0], q, 10_000).unwrap().value;
            for &a in &units {
                assert_eq!(c_k_alpha(k, a, q, 10_000).unwrap().value, first);
            }
        }
    }
}

#[test]
fn concentrated_constant_depends_only_on_modulus() {
    for q in 1..=12u64 {
        let g = character_group(q).unwrap();
        let base = c_ell_q(&ExponentTuple::delta(&g, 0, 2).unwrap(), 100_000);
        for i in 1..g.len() {
            let r = c_ell_q(&ExponentTuple::delta(&g, i, 2).unwrap(), 100_000);
            assert!((r.value - base.value).abs() <= 1e-12 * base.value, "q={q} i={i}");
        }
    }
}

#[test]
fn pair_constant_depends_only_on_quotient() {
    let g = character_group(5).unwrap();
    let chars = g.characters();
    let mut by_quotient: std::collections::HashMap<usize, Vec<f64>> = Default::default();
    for a in chars {
        for b in chars {
            if a.index() == b.index() {
                continue;
            }
            let quotient = a.mul(&b.conj()).unwrap().index();
            let ell = ExponentTuple::from_pairs(&g, &[(a.index(), 1), (b.index(), 1)]).unwrap();
            by_quotient.entry(quotient).or_default().push(c_ell_q(&ell, 100_000).value);
        }
    }
    for vals in by_quotient.values() {
        for v in vals {
            assert!((v - vals[0]).abs() < 1e-12 * vals[0]);
        }
    }
}

#[test]
fn short_product_coefficients_agree_on_small_smooth_numbers() {
    let x = 50.0f64;
    let g = character_group(3).unwrap();
    for ell in ExponentTuple::all_with_weight(&g, 2) {
        let beta = beta_ell(&ell, x, 5000).unwrap();
        for n in smooth_numbers(3, x.sqrt(), 5000) {
            assert!((beta.value(n) - d_ell(&ell, n)).norm() < 1e-9, "n={n}");
        }
        for p in [11u64, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
            assert!((beta.value(p) - d_ell(&ell, p)).norm() < 1e-12);
        }
    }
}

#[test]
fn full_expansion_reproduces_hurwitz_moment() {
    let spec = QuadratureSpec::default();
    for (k, a, q) in [(1u32, 1u64, 3u64), (1, 3, 4), (2, 2, 3), (2, 1, 4)] {
        let d = diagonal_prediction(k, a, q, 500.0, &spec, true).unwrap();
        let m = hurwitz_moment(k, a, q, 500.0, &spec).unwrap();
        let full = d.full.unwrap();
        assert!((full / m.value - 1.0).abs() < 1e-9, "k={k} a={a} q={q}: {full} vs {}", m.value);
        assert!(d.primary_diagonal > 0.0 && d.secondary_diagonal >= 0.0);
    }
}
