use std::time::Instant;

use gl3moment::afe::{
    afe_central_value, afe_central_value_with_cut, v_tilde_weight, v_weight, CoefficientSource,
};
use gl3moment::eisenstein::MinimalEisenstein;
use gl3moment::gl2forms::{build_eigenform, l_value};
use gl3moment::numerics::{ComplexValue, QuadratureSpec};
use gl3moment::spectral::LanglandsParameter;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default().with_tolerance(1e-8)
}

fn factorized(f: &gl3moment::gl2forms::HolomorphicForm, mu: &LanglandsParameter) -> ComplexValue {
    let q = QuadratureSpec::default().with_tolerance(1e-13);
    mu.mu
        .iter()
        .map(|&m| l_value(f, 0.5 - m, &q).unwrap())
        .product()
}

#[test]
fn central_value_factorizes_at_eisenstein_point() {
    let start = Instant::now();
    let f = build_eigenform(12, 100_000).unwrap();
    // ‖μ‖ = 5 along (2, 1, −3)/√14
    let d = 5.0 / 14f64.sqrt();
    let mu = LanglandsParameter::from_imaginary(2.0 * d, d);
    let e = MinimalEisenstein::new(mu);
    let source = CoefficientSource::minimal(&e).unwrap();
    let afe = afe_central_value(&f, &mu, &source, &spec(), 10_000_000).unwrap();
    let expected = factorized(&f, &mu);
    let rel = (afe.value - expected).norm() / expected.norm();
    eprintln!("AFE {} vs {}: rel {rel:.2e}, X = {}, {:?}", afe.value, expected, afe.x_cut, start.elapsed());
    assert!(rel < 1e-6);
}

#[test]
fn self_dual_point_is_real() {
    let f = build_eigenform(16, 100_000).unwrap();
    let mu = LanglandsParameter::from_imaginary(3.1, -3.1);
    let e = MinimalEisenstein::new(mu);
    let source = CoefficientSource::minimal(&e).unwrap();
    let q = spec().with_tolerance(1e-7);
    let afe = afe_central_value(&f, &mu, &source, &q, 10_000_000).unwrap();
    assert!(afe.value.im.abs() < 1e-8, "{}", afe.value);
    let expected = factorized(&f, &mu);
    assert!((afe.value - expected).norm() < 1e-6 * expected.norm());
}

#[test]
fn doubling_the_cut_stays_within_tail_bound() {
    let f = build_eigenform(12, 100_000).unwrap();
    let mu = LanglandsParameter::from_imaginary(1.5, 2.5);
    let e = MinimalEisenstein::new(mu);
    let source = CoefficientSource::minimal(&e).unwrap();
    let q = spec().with_tolerance(1e-6);
    let a = afe_central_value(&f, &mu, &source, &q, 10_000_000).unwrap();
    let b = afe_central_value_with_cut(&f, &mu, &source, &q, 10_000_000, 2 * a.x_cut).unwrap();
    assert!((a.value - b.value).norm() <= a.tail_bound, "{} {} {}", a.value, b.value, a.tail_bound);
}

#[test]
fn delta_source_collapses() {
    let f = build_eigenform(12, 100).unwrap();
    let mu = LanglandsParameter::from_imaginary(0.7, -2.0);
    let afe = afe_central_value_with_cut(&f, &mu, &CoefficientSource::delta(), &spec(), 1000, 50).unwrap();
    let expected = v_weight(1.0, 12, &mu, &spec()).unwrap() + v_tilde_weight(1.0, 12, &mu, &spec()).unwrap();
    assert!((afe.value - expected).norm() < 1e-13);
}

#[test]
fn budget_is_enforced() {
    let f = build_eigenform(12, 100_000).unwrap();
    let mu = LanglandsParameter::from_imaginary(2.0, 1.0);
    let e = MinimalEisenstein::new(mu);
    let source = CoefficientSource::minimal(&e).unwrap();
    match afe_central_value(&f, &mu, &source, &spec(), 3) {
        Err(gl3moment::Error::Budget { needed, limit, .. }) => {
            assert_eq!(limit, 3);
            assert!(needed > 3);
        }
        other => panic!("{other:?}"),
    }
}
