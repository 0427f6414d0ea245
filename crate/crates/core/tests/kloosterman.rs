use gl3moment::arithmetic::{divisors, factorize, gcd, mobius, mod_inverse};
use gl3moment::kloosterman::{
    classical_kloosterman, complete_kloosterman_shifted, incomplete_bound, incomplete_kloosterman, KloostermanInput,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn classical_sum_is_real_and_symmetric(a in -50i64..50, b in -50i64..50, c in 1u64..60) {
        let s = classical_kloosterman(a, b, c).unwrap();
        let t = classical_kloosterman(b, a, c).unwrap();
        prop_assert!(s.im.abs() < 1e-9);
        prop_assert!((s - t).norm() < 1e-9);
        prop_assert!((s - classical_kloosterman(a + c as i64, b, c).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn classical_weil_bound(a in 1i64..50, b in 1i64..50, c in 1u64..80) {
        let s = classical_kloosterman(a, b, c).unwrap().norm();
        let tau = divisors(c).len() as f64;
        let g = gcd(gcd(a, b), c as i64) as f64;
        prop_assert!(s <= tau * (g * c as f64).sqrt() + 1e-9);
    }

    #[test]
    fn incomplete_sum_respects_its_bound(n1 in -20i64..20, n2 in -20i64..20, m1 in -20i64..20, d1 in 1u64..8, k in 1u64..6) {
        let input = KloostermanInput::incomplete(n1, n2, m1, d1, d1 * k).unwrap();
        let s = incomplete_kloosterman(&input).unwrap();
        prop_assert!(s.norm() <= incomplete_bound(&input) * (1.0 + 1e-12) + 1e-9);
        let moved = KloostermanInput::incomplete(n1 + d1 as i64, n2, m1, d1, d1 * k).unwrap();
        prop_assert!((incomplete_kloosterman(&moved).unwrap() - s).norm() < 1e-9);
    }

    #[test]
    fn complete_sum_ignores_the_representative_shift(
        n in prop::array::uniform4(-15i64..15), d1 in 1u64..9, d2 in 1u64..9, k1 in -3i64..3, k2 in -3i64..3,
    ) {
        let input = KloostermanInput::new(n[0], n[1], n[2], n[3], d1, d2).unwrap();
        let a = complete_kloosterman_shifted(&input, 0, 0).unwrap();
        let b = complete_kloosterman_shifted(&input, k1, k2).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn factorization_round_trips(n in 1u64..1_000_000) {
        let product: u64 = factorize(n).iter().map(|&(p, e)| p.pow(e)).product();
        prop_assert_eq!(product, n);
        let mu_sum: i64 = divisors(n).iter().map(|&d| mobius(d) as i64).sum();
        prop_assert_eq!(mu_sum, i64::from(n == 1));
    }

    #[test]
    fn inverses_invert(a in -1000i64..1000, m in 2i64..1000) {
        match mod_inverse(a, m) {
            Ok(x) => prop_assert_eq!((a * x).rem_euclid(m), 1),
            Err(_) => prop_assert!(gcd(a, m) != 1),
        }
    }
}

#[test]
fn small_classical_values() {
    // S(1, 1; 5) summed by hand
    let want: f64 = [1i64, 2, 3, 4]
        .iter()
        .map(|&x| {
            let inv = (1..5).find(|y| x * y % 5 == 1).unwrap();
            (2.0 * std::f64::consts::PI * (x + inv) as f64 / 5.0).cos()
        })
        .sum();
    assert!((classical_kloosterman(1, 1, 5).unwrap().re - want).abs() < 1e-12);
    assert!(classical_kloosterman(1, 1, 0).is_err());
}

#[test]
fn zero_modulus_is_rejected() {
    assert!(KloostermanInput::new(1, 1, 1, 1, 0, 3).is_err());
    assert!(incomplete_kloosterman(&KloostermanInput::incomplete(1, 1, 1, 2, 3).unwrap()).is_err());
}
