use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use gl3moment::afe::{v_tilde_weight, v_weight};
use gl3moment::arithmetic::primes_up_to;
use gl3moment::eisenstein::{a_max, max_normalizer, MaximalEisenstein};
use gl3moment::gl2forms::{build_eigenform, ingest_maass_data, HolomorphicForm, MaassFormRecord};
use gl3moment::kloosterman::{KloostermanCache, KloostermanInput, SumKindKey};
use gl3moment::numerics::{ln_gamma, vertical_line_integral, ComplexValue, QuadratureSpec};
use gl3moment::spectral::{test_function, LanglandsParameter, TestFunctionSpec};
use gl3moment::workbench::*;
use gl3moment::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

fn rel(a: ComplexValue, b: ComplexValue) -> f64 {
    (a - b).norm() / b.norm()
}

fn delta() -> HolomorphicForm {
    build_eigenform(12, 20_000).unwrap()
}

fn bench(step: f64, p: u64) -> Workbench {
    let cfg = WorkbenchConfig::default();
    Workbench::new(&cfg.test_spec().unwrap(), step, delta(), p, cfg.quadrature).unwrap()
}

// 2^{1−z}π^{−z}Γ(z)
fn gamma_pair(z: ComplexValue) -> ComplexValue {
    ((1.0 - z) * 2f64.ln() - z * PI.ln() + ln_gamma(z).unwrap()).exp()
}

// Π Γpair(s + k/2 − μ_j)/Γpair(k/2 − μ_j)
fn gamma_quotient(s: ComplexValue, k: u32, mu: &LanglandsParameter) -> ComplexValue {
    let half = k as f64 / 2.0;
    mu.mu
        .iter()
        .map(|&m| gamma_pair(s + half - m) / gamma_pair(c(half, 0.0) - m))
        .product()
}

// L(w, f) = Π_p (1 − λ(p)p^{−w} + p^{−2w})^{−1} over the whole table
fn euler(f: &HolomorphicForm, primes: &[u64], w: ComplexValue) -> ComplexValue {
    primes
        .iter()
        .map(|&p| {
            let x = c(p as f64, 0.0).powc(-w);
            1.0 / (1.0 - f.lambda(p as usize).unwrap() * x + x * x)
        })
        .product()
}

fn synthetic() -> Vec<MaassFormRecord> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/maass_synthetic.csv");
    ingest_maass_data(&path).unwrap()
}

fn scratch_config(dir: &std::path::Path) -> WorkbenchConfig {
    WorkbenchConfig {
        spectral_step: 0.2,
        cache_dir: dir.join("cache"),
        output_path: dir.join("report.json"),
        ..WorkbenchConfig::default()
    }
}

#[test]
fn gamma_ratio_at_origin_is_one() {
    assert_eq!(gamma_ratio(12, &LanglandsParameter::from_imaginary(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    // purely imaginary μ: modulus one
    let r = gamma_ratio(16, &LanglandsParameter::from_imaginary(3.1, -1.7)).unwrap();
    assert!((r.norm() - 1.0).abs() < 1e-12, "{r}");
}

#[test]
fn main_term_scale_and_step_halving() {
    let cfg = WorkbenchConfig::default();
    let spec = cfg.test_spec().unwrap();
    let main = main_term(&cfg).unwrap();
    // the scale is set by the unnormalized polynomial factor of h, so it is only recorded
    let scaled = main.re / (spec.t.powi(3) * spec.m * spec.m);
    eprintln!("main/(T³M²) = {scaled:.6e}");
    assert!(main.re > 0.0 && scaled.is_finite(), "{main}");

    let fine = main_term(&WorkbenchConfig {
        spectral_step: 0.05,
        ..cfg
    })
    .unwrap();
    assert!(rel(fine, main) < 1e-6, "{fine} vs {main}");
}

#[test]
fn tabulated_weights_match_direct_contours() {
    let wb = bench(0.3, 1);
    let q = QuadratureSpec::default();
    let n = wb.lattice.len();
    for y in [1e-6, 1.0, 8.0] {
        let v = wb.weights_at(y, false).unwrap();
        let vt = wb.weights_at(y, true).unwrap();
        for i in (0..n).step_by(n / 9) {
            let mu = &wb.lattice.orbits[i].mu;
            let dv = v_weight(y, 12, mu, &q).unwrap();
            let dvt = v_tilde_weight(y, 12, mu, &q).unwrap();
            assert!((v[i] - dv).norm() < 1e-9, "V y={y} {mu:?}: {} vs {dv}", v[i]);
            assert!((vt[i] - dvt).norm() < 1e-9, "Ṽ y={y} {mu:?}: {} vs {dvt}", vt[i]);
        }
    }
}

#[test]
fn small_argument_weights_rebuild_main_term() {
    // V → 1 and Ṽ → Π Γ(k/2+μ)/Γ(k/2−μ) as y → 0
    let wb = bench(0.1, 1);
    let v = wb.weighted_integral(1e-6, false).unwrap();
    let vt = wb.weighted_integral(1e-6, true).unwrap();
    let main = wb.main_term().unwrap();
    assert!(rel(v + vt, main) < 1e-9, "{} vs {main}", v + vt);
}

#[test]
fn diagonal_carries_the_twist() {
    let wb = bench(0.3, 1);
    assert_eq!(wb.diagonal_term().unwrap(), wb.weighted_integral(1.0, false).unwrap());
    let wb = bench(0.3, 3);
    // λ_Δ(3) = τ(3)/3^{11/2}
    let twist = 252.0 / 3f64.powf(5.5) / 3f64.powf(1.5);
    assert!((wb.twist().unwrap() - twist).abs() < 1e-15);
    let expected = wb.weighted_integral(27.0, true).unwrap() * wb.twist().unwrap();
    assert_eq!(wb.diagonal_tilde_term().unwrap(), expected);
}

#[test]
fn inner_minimal_integral_matches_direct_contour() {
    let wb = bench(0.3, 1);
    let f = &wb.form;
    let primes = primes_up_to(f.n_max());
    let q = QuadratureSpec::default();
    let at3 = wb.inner_min_at_orbits(INNER_SIGMA).unwrap();
    let n = wb.lattice.len();
    for i in (0..n).step_by(n / 5) {
        let mu = wb.lattice.orbits[i].mu;
        let direct = vertical_line_integral(
            |s| {
                let l: ComplexValue = mu.mu.iter().map(|&m| euler(f, &primes, 0.5 + s - m)).product();
                Ok((s * s).exp() * gamma_quotient(s, 12, &mu) * l / s)
            },
            INNER_SIGMA,
            &q,
        )
        .unwrap();
        assert!(rel(at3[i], direct) < 1e-8, "{mu:?}: {} vs {direct}", at3[i]);
    }
}

#[test]
fn inner_minimal_integral_is_contour_independent() {
    // |μ| ≤ 3, where the integrand on Re s = 4 is only ~10⁸ times the integral;
    // further out rounding on that line alone exceeds 10⁻⁷
    let spec = TestFunctionSpec::with_default_direction(2.0, 0.5, 2).unwrap();
    let wb = Workbench::new(&spec, 0.1, delta(), 1, QuadratureSpec::default()).unwrap();
    let at2 = wb.inner_min_at_orbits(2.0).unwrap();
    let at3 = wb.inner_min_at_orbits(3.0).unwrap();
    let at4 = wb.inner_min_at_orbits(4.0).unwrap();
    for (i, o) in wb.lattice.orbits.iter().enumerate() {
        if o.k[0].abs().max(o.k[2].abs()) > 30 || i % 7 != 0 {
            continue;
        }
        assert!(rel(at2[i], at3[i]) < 1e-9, "{:?}: {} vs {}", o.k, at2[i], at3[i]);
        assert!(rel(at4[i], at3[i]) < 5e-8, "{:?}: {} vs {}", o.k, at4[i], at3[i]);
    }
}

#[test]
fn minimal_eisenstein_term_is_finite_and_flags_walls() {
    let wb = bench(0.2, 1);
    let e = wb.eis_min_term().unwrap();
    assert!(e.value.re.is_finite() && e.value.im.is_finite());
    assert!(e.value.norm() > 0.0);
    assert!(e.pole_proximity > 0);
}

#[test]
fn maximal_eisenstein_needs_records() {
    let wb = bench(0.3, 1);
    assert!(matches!(wb.eis_max_term(&[], None), Err(Error::NoData(_))));
    // a record far from the window contributes nothing, and says so
    let far = MaassFormRecord::new(60.0, 1.0, primes_up_to(50).into_iter().map(|p| (p, 0.0)).collect(), "far").unwrap();
    let t = wb.eis_max_term(&[far], None).unwrap();
    assert_eq!(t.value, c(0.0, 0.0));
    assert!(t.contributing.is_empty());
    assert!(t.disclaimer.contains("0 of them"), "{}", t.disclaimer);
}

#[test]
fn maximal_eisenstein_with_vanishing_eigenvalues_matches_hand_assembly() {
    // λ_g(p) = 0 makes the local factor of L(w, f⊗g) equal to 1/(1 + (λ_f(p)² − 2)p^{−2w} + p^{−4w})
    let primes: Vec<u64> = primes_up_to(97);
    let lambda: BTreeMap<u64, f64> = primes.iter().map(|&p| (p, 0.0)).collect();
    // t_g chosen so that (i(v+t), i(v−t), −2iv) meets the Weyl orbit of μ⁰ near v = −1.34
    let g = MaassFormRecord::new(6.68, 0.7, lambda, "zero").unwrap();
    let step = 0.5;
    let height = 2.0;
    // p = 1: with λ_g(p) = 0 and u imaginary, A(p, p) = |p^{2u}|² − 1 vanishes
    let wb = bench(step, 1);
    let f = &wb.form;
    let all_primes = primes_up_to(f.n_max());
    let q = QuadratureSpec::default();
    let got = wb.eis_max_term(std::slice::from_ref(&g), Some(height)).unwrap();

    let rankin = |w: ComplexValue| -> ComplexValue {
        primes
            .iter()
            .map(|&p| {
                let x = c(p as f64, 0.0).powc(-2.0 * w);
                let lf = f.lambda(p as usize).unwrap();
                1.0 / (1.0 + (lf * lf - 2.0) * x + x * x)
            })
            .product()
    };
    let spec = &wb.lattice.spec;
    let mut expected = c(0.0, 0.0);
    let mut nodes = 0;
    for n in -4i64..=4 {
        let v = n as f64 * step;
        let u = c(0.0, v);
        let mu = LanglandsParameter {
            mu: [c(0.0, v + g.t_g), c(0.0, v - g.t_g), c(0.0, -2.0 * v)],
        };
        let h = test_function(&mu, spec).re;
        if h.abs() < 1e-12 {
            continue;
        }
        nodes += 1;
        let inner = vertical_line_integral(
            |s| {
                let lf = euler(f, &all_primes, 0.5 + s + 2.0 * u);
                Ok((s * s).exp() * gamma_quotient(s, 12, &mu) * lf * rankin(0.5 + s - u) / s)
            },
            INNER_SIGMA,
            &q,
        )
        .unwrap();
        let e = MaximalEisenstein::new(u, g.clone());
        expected += a_max(&e, 1, 1).unwrap() * h / max_normalizer(&e, &q).unwrap() * inner * (step / (2.0 * PI));
    }
    assert!(nodes >= 5, "only {nodes} nodes meet the window");
    assert!(rel(got.value, expected) < 1e-7, "{} vs {expected}", got.value);
    assert_eq!(got.u_height, height);
}

#[test]
fn maximal_eisenstein_u_height_converged() {
    let wb = bench(0.1, 1);
    let records = synthetic();
    let base = wb.eis_max_term(&records, None).unwrap();
    let doubled = wb.eis_max_term(&records, Some(2.0 * base.u_height)).unwrap();
    assert!(!base.contributing.is_empty());
    assert!(rel(doubled.value, base.value) < 1e-6, "{} vs {}", doubled.value, base.value);
    assert!(base.tail_bound.is_finite());
}

#[test]
fn main_condition_threshold() {
    assert_eq!(main_condition(1, 10.0), (1.0, true));
    let (threshold, holds) = main_condition(2, 10.0);
    assert!((threshold - 2f64.powf(3.4375)).abs() < 1e-12);
    assert!(!holds);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scratch_config(dir.path());
    let first = moment_report(&cfg).unwrap();
    let first_text = std::fs::read_to_string(&cfg.output_path).unwrap();
    let second = moment_report(&cfg).unwrap();
    assert!(first.complete);
    assert_eq!(first.without_timestamp().unwrap(), second.without_timestamp().unwrap());
    // the cached coefficients give the same numbers as the freshly built ones
    assert_eq!(first.main_term, second.main_term);
    assert_eq!(first.eis_min_term, second.eis_min_term);
    let back = MomentReport::from_json(&first_text).unwrap();
    assert_eq!(back, first);
}

#[test]
fn twisting_changes_only_p_dependent_fields() {
    let dir = tempfile::tempdir().unwrap();
    let one = moment_report(&scratch_config(dir.path())).unwrap();
    let two = moment_report(&WorkbenchConfig {
        p: 2,
        ..scratch_config(dir.path())
    })
    .unwrap();
    assert_eq!(one.main_term, two.main_term);
    assert_eq!(one.lattice_orbits, two.lattice_orbits);
    assert_eq!(one.diagnostics.main_over_t3m2, two.diagnostics.main_over_t3m2);
    assert_eq!(one.diagnostics.main_step_residual, two.diagnostics.main_step_residual);
    assert_eq!(one.twist, 1.0);
    assert!((two.twist - (-24.0 / 2f64.powf(5.5)) / 2f64.powf(1.5)).abs() < 1e-15);
    assert_ne!(one.config_hash, two.config_hash);
    assert_ne!(one.diagonal_term, two.diagonal_term);
    assert_ne!(one.eis_min_term, two.eis_min_term);
    assert!(one.diagnostics.main_condition_holds);
    assert!(!two.diagnostics.main_condition_holds);
}

#[test]
fn failed_run_leaves_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = WorkbenchConfig {
        maass_data_path: Some(dir.path().join("missing.csv")),
        ..scratch_config(dir.path())
    };
    assert!(moment_report(&cfg).is_err());
    let r = MomentReport::from_json(&std::fs::read_to_string(&cfg.output_path).unwrap()).unwrap();
    assert!(!r.complete);
    assert!(r.error.is_some());
    assert!(r.main_term.is_none());
    assert_eq!(r.config_hash, cfg.hash());
}

#[test]
fn report_with_maass_records() {
    let dir = tempfile::tempdir().unwrap();
    let csv = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/maass_synthetic.csv");
    let cfg = WorkbenchConfig {
        maass_data_path: Some(csv),
        ..scratch_config(dir.path())
    };
    let r = moment_report(&cfg).unwrap();
    assert!(r.eis_max_term.is_some());
    assert!(r.eis_max_disclaimer.as_deref().unwrap().contains("record(s) supplied"));
}

#[test]
fn empty_caches_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = KloostermanCache::new();
    let path = kloosterman_cache_path(dir.path());
    write_kloosterman_cache(&path, &cache).unwrap();
    assert!(read_kloosterman_cache(&path).unwrap().is_empty());
}

#[test]
fn ten_thousand_entries_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let cache = KloostermanCache::new();
    while cache.len() < 10_000 {
        let kind = if rng.gen_bool(0.5) {
            SumKindKey::Complete
        } else {
            SumKindKey::Incomplete
        };
        let input = KloostermanInput::new(
            rng.gen_range(-500..500),
            rng.gen_range(-500..500),
            rng.gen_range(-500..500),
            rng.gen_range(-500..500),
            rng.gen_range(1..200),
            rng.gen_range(1..200),
        )
        .unwrap();
        let z = c(rng.gen_range(-1e3..1e3), rng.gen::<f64>() * 1e-7);
        cache.insert(kind, input, z);
    }
    let form = build_eigenform(12, 300).unwrap();
    cache_roundtrip(dir.path(), &form, &cache).unwrap();
}

#[test]
fn truncated_caches_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cache = KloostermanCache::new();
    for d in 1..40u64 {
        cache.insert(
            SumKindKey::Complete,
            KloostermanInput::new(1, 1, 1, 1, d, d).unwrap(),
            c(d as f64, 0.5),
        );
    }
    let kpath = kloosterman_cache_path(dir.path());
    write_kloosterman_cache(&kpath, &cache).unwrap();
    let text = std::fs::read_to_string(&kpath).unwrap();
    let cut: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
    std::fs::write(&kpath, cut).unwrap();
    assert!(matches!(read_kloosterman_cache(&kpath), Err(Error::Corruption { .. })));

    let form = build_eigenform(12, 300).unwrap();
    let cpath = coefficient_cache_path(dir.path(), 12, 300);
    write_coefficient_cache(&cpath, &form).unwrap();
    let text = std::fs::read_to_string(&cpath).unwrap();
    std::fs::write(&cpath, &text[..text.len() / 2]).unwrap();
    assert!(matches!(read_coefficient_cache(&cpath, 12), Err(Error::Corruption { .. })));
    // a cache for another weight is not silently reused
    write_coefficient_cache(&cpath, &form).unwrap();
    assert!(matches!(read_coefficient_cache(&cpath, 16), Err(Error::Corruption { line: 1, .. })));
}

proptest! {
    #[test]
    fn decimal_text_is_lossless(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        let back: f64 = decimal(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}
