use std::collections::BTreeMap;
use std::time::Instant;

use gl3moment::arithmetic::{factorize, primes_up_to};
use gl3moment::gl2forms::{
    build_eigenform, l_value, rankin_selberg_truncated, MaassFormRecord, HolomorphicForm,
};
use gl3moment::numerics::{CompensatedSum, ComplexValue, QuadratureSpec};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

#[test]
fn hecke_relations_and_deligne_bound() {
    for k in [12, 16, 20] {
        let f = build_eigenform(k, 3000).unwrap();
        assert!(f.hecke_defect() < 1e-12, "k={k}: {}", f.hecke_defect());
        assert!(f.max_prime_eigenvalue() <= 2.0);
        for p in primes_up_to(54) {
            let lp = f.lambda(p as usize).unwrap();
            let lp2 = f.lambda((p * p) as usize).unwrap();
            assert!((lp2 - (lp * lp - 1.0)).abs() < 1e-12);
        }
    }
}

#[test]
fn full_table_builds_quickly() {
    let start = Instant::now();
    let f = build_eigenform(20, 100_000).unwrap();
    assert_eq!(f.n_max(), 100_000);
    assert!(f.max_prime_eigenvalue() <= 2.0);
    eprintln!("k=20, N=1e5 built in {:?}", start.elapsed());
}

#[test]
fn out_of_range_indices() {
    let f = build_eigenform(12, 10).unwrap();
    assert_eq!(f.lambda(0), None);
    assert_eq!(f.lambda(11), None);
}

fn maass_record(lambda: impl Fn(u64) -> f64, limit: u64) -> MaassFormRecord {
    let table: BTreeMap<u64, f64> = primes_up_to(limit as usize).into_iter().map(|p| (p, lambda(p))).collect();
    MaassFormRecord::new(9.533_695_261_353, 1.0, table, "synthetic").unwrap()
}

#[test]
fn rankin_selberg_truncation_doubling() {
    let f = build_eigenform(12, 4000).unwrap();
    let g = maass_record(|p| ((p as f64).sqrt().sin()) * 0.9, 4000);
    let a = rankin_selberg_truncated(&f, &g, c(3.0, 0.0), 1000).unwrap();
    let b = rankin_selberg_truncated(&f, &g, c(3.0, 0.0), 2000).unwrap();
    assert!((a.value - b.value).norm() <= a.tail_bound);
    assert!(b.tail_bound < a.tail_bound);
    assert!(a.value.im.abs() < 1e-10);
}

#[test]
fn rankin_selberg_with_vanishing_g() {
    // λ_g ≡ 0 leaves Π_p (1 + (λ_f(p)²−2)p^{−2s} + p^{−4s})^{−1} = Σ b(n) n^{−s},
    // b supported on squares with b(p^{2k}) = (−1)^k Σ_j (−1)^j λ_f(p^{2k−2j})
    let n = 40_000usize;
    let f = build_eigenform(12, n).unwrap();
    let g = maass_record(|_| 0.0, 200);
    let s = c(2.5, 1.0);
    let prod = rankin_selberg_truncated(&f, &g, s, 200).unwrap();
    let b = |m: usize| -> f64 {
        factorize(m as u64)
            .into_iter()
            .map(|(p, e)| {
                if e % 2 == 1 {
                    return 0.0;
                }
                let k = e / 2;
                let alt: f64 = (0..=k)
                    .map(|j| {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        sign * f.lambda((p as usize).pow(2 * (k - j))).unwrap()
                    })
                    .sum();
                if k % 2 == 0 { alt } else { -alt }
            })
            .product()
    };
    // primes ≤ 200 only: restrict to 200-smooth square indices
    let series: CompensatedSum = (1..=n)
        .filter(|&m| factorize(m as u64).iter().all(|&(p, _)| p <= 200))
        .map(|m| b(m) * c(m as f64, 0.0).powc(-s))
        .collect();
    assert!((prod.value - series.value()).norm() < 1e-8, "{} {}", prod.value, series.value());
}

#[test]
fn missing_prime_is_named() {
    let f = build_eigenform(12, 100).unwrap();
    let mut table = BTreeMap::new();
    table.insert(2, 0.5);
    table.insert(5, 0.5);
    let g = MaassFormRecord::new(3.0, 1.0, table, "gap").unwrap();
    assert_eq!(
        rankin_selberg_truncated(&f, &g, c(2.0, 0.0), 10).unwrap_err(),
        gl3moment::Error::MissingPrime(3)
    );
}

fn lambda_completed(f: &HolomorphicForm, s: ComplexValue) -> ComplexValue {
    let spec = QuadratureSpec::default().with_tolerance(1e-13);
    let k = f.weight() as f64;
    let sp = s + (k - 1.0) / 2.0;
    let g = (gl3moment::numerics::ln_gamma(sp).unwrap() - sp * (2.0 * std::f64::consts::PI).ln()).exp();
    g * l_value(f, s, &spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn completed_l_function_is_symmetric(x in 0.0f64..1.0, y in -8.0f64..8.0) {
        let f = build_eigenform(12, 400).unwrap();
        let a = lambda_completed(&f, c(x, y));
        let b = lambda_completed(&f, c(1.0 - x, -y));
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1e-300), "{} {}", a, b);
    }
}
