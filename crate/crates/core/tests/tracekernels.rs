use gl3moment::numerics::{adaptive_gauss_kronrod, ln_gamma, ComplexValue, QuadratureSpec, I};
use gl3moment::spectral::{spec_measure, LanglandsParameter, TestFunctionSpec};
use gl3moment::tracekernels::*;
use gl3moment::Error;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

fn rel(a: ComplexValue, b: ComplexValue) -> f64 {
    (a - b).norm() / b.norm()
}

fn generic_mu() -> LanglandsParameter {
    LanglandsParameter::from_imaginary(2.3, -0.9)
}

// Closing the w₄ contour to the left picks up the simple poles of
// Γ((s−μ_j)/2) at s = μ_j − 2m and of Γ((1+s−μ_j)/2) at s = μ_j − 1 − 2m.
fn w4_residue_series(y: f64, mu: &LanglandsParameter, depth: u32) -> ComplexValue {
    let ln_c = (12288.0 * PI.powf(3.5)).ln();
    let ly = y.abs().ln() + 3.0 * PI.ln();
    let one = c(1.0, 0.0);
    let mut first = c(0.0, 0.0);
    let mut second = c(0.0, 0.0);
    for j in 0..3 {
        for m in 0..depth {
            let lf = (1..=m).map(|x| (x as f64).ln()).sum::<f64>();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            // first product at s = μ_j − 2m
            let s = mu.mu[j] - 2.0 * m as f64;
            let mut l = -s * ly - ln_c - lf + 2f64.ln();
            for k in 0..3 {
                if k != j {
                    l += ln_gamma((s - mu.mu[k]) * 0.5).unwrap();
                }
                l -= ln_gamma((one - s + mu.mu[k]) * 0.5).unwrap();
            }
            first += sign * l.exp();
            // second product at s = μ_j − 1 − 2m
            let s = mu.mu[j] - 1.0 - 2.0 * m as f64;
            let mut l = -s * ly - ln_c - lf + 2f64.ln();
            for k in 0..3 {
                if k != j {
                    l += ln_gamma((one + s - mu.mu[k]) * 0.5).unwrap();
                }
                l -= ln_gamma((2.0 - s + mu.mu[k]) * 0.5).unwrap();
            }
            second += sign * l.exp();
        }
    }
    if y > 0.0 {
        first + I * second
    } else {
        first - I * second
    }
}

#[test]
fn w4_kernel_matches_residue_series() {
    let q = QuadratureSpec::default();
    let mu = generic_mu();
    for y in [0.02, -0.02, 0.3, -0.5] {
        let k = kernel_w4(y, &mu, &q).unwrap();
        let r = w4_residue_series(y, &mu, 80);
        assert!(rel(k, r) < 1e-8, "y={y}: {k} vs {r}");
    }
}

#[test]
fn w4_contour_shift() {
    let q = QuadratureSpec::default();
    let mu = generic_mu();
    for y in [0.5, -3.0, 40.0, -700.0] {
        let a = kernel_w4_on(y, &mu, 0.25, &q).unwrap();
        let b = kernel_w4_on(y, &mu, 0.375, &q).unwrap();
        assert!(rel(a, b) < 1e-8, "y={y}: {a} vs {b}");
    }
}

#[test]
fn w4_conjugation_flips_sign_of_y() {
    // Schwarz reflection swaps G̃⁺ and G̃⁻, so conj K(y; μ) = K(−y; μ̄) = K(−y; −μ) on Re μ = 0
    let q = QuadratureSpec::default();
    let mu = generic_mu();
    for y in [0.7, -20.0] {
        let a = kernel_w4(y, &mu, &q).unwrap().conj();
        let b = kernel_w4(-y, &mu.neg(), &q).unwrap();
        assert!(rel(a, b) < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn w4_weyl_invariance() {
    let q = QuadratureSpec::default();
    let mu = generic_mu();
    let base = kernel_w4(5.0, &mu, &q).unwrap();
    for w in mu.weyl_orbit() {
        assert!(rel(kernel_w4(5.0, &w, &q).unwrap(), base) < 1e-10);
    }
}

#[test]
fn w4_small_argument_regime() {
    // on Re μ = 0 the poles nearest the contour give terms |y|^{−μ_j} of modulus one,
    // so K stays of constant size as |y| → 0; past the first pole of each product the rest is O(|y|²)
    let q = QuadratureSpec::default();
    let mu = generic_mu();
    let dev: Vec<f64> = [1e-4, 1e-3]
        .iter()
        .map(|&y| {
            let lead = w4_residue_series(y, &mu, 1);
            let k = kernel_w4(y, &mu, &q).unwrap();
            assert!(rel(k, lead) < 0.05, "y={y}: {k} vs {lead}");
            (k - lead).norm()
        })
        .collect();
    let ratio = dev[1] / dev[0];
    assert!(ratio > 50.0 && ratio < 200.0, "{dev:?}");
}

fn bessel_k(nu: ComplexValue, x: f64) -> ComplexValue {
    // K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt
    let h: f64 = 0.005;
    let mut sum = c(0.5 * (-x).exp(), 0.0);
    let mut t: f64 = h;
    while x * t.cosh() < 745.0 {
        sum += (nu * t).cosh() * (-x * t.cosh()).exp();
        t += h;
    }
    sum * h
}

// Γ(s₁−μ₃)Γ(s₂+μ₃)/Γ(s₁+s₂) is a Beta function, which separates the double
// Mellin–Barnes integral into a product of two K-Bessel transforms.
fn wl_plus_plus_oracle(y1: f64, y2: f64, mu: &LanglandsParameter) -> ComplexValue {
    let [m1, m2, m3] = mu.mu;
    let x1 = 4.0 * PI * PI * y1;
    let x2 = 4.0 * PI * PI * y2;
    let one = c(1.0, 0.0);
    let f = |t: f64| -> ComplexValue {
        let a1 = x1 / t;
        let a2 = x2 / (1.0 - t);
        let k1 = 2.0 * (c(a1, 0.0)).powc(m3 * 0.5) * bessel_k(m2 - m1, 2.0 * a1.sqrt());
        let k2 = 2.0 * (c(a2, 0.0)).powc(-m3 * 0.5) * bessel_k(m1 - m2, 2.0 * a2.sqrt());
        c(t, 0.0).powc(-m3 - one) * c(1.0 - t, 0.0).powc(m3 - one) * k1 * k2
    };
    let re = adaptive_gauss_kronrod(|t| f(t).re, 0.0, 1.0, 1e-16, 16).unwrap();
    let im = adaptive_gauss_kronrod(|t| f(t).im, 0.0, 1.0, 1e-16, 16).unwrap();
    SignPattern::PlusPlus.trig_constant(mu).unwrap() * c(re, im)
}

#[test]
fn wl_plus_plus_matches_bessel_oracle() {
    let q = QuadratureSpec::default();
    let mu = LanglandsParameter::from_imaginary(0.7, -1.3);
    for (y1, y2) in [(0.08, 0.12), (0.3, 0.05)] {
        let k = kernel_wl(y1, y2, &mu, &q).unwrap();
        let o = wl_plus_plus_oracle(y1, y2, &mu);
        assert!(rel(k, o) < 1e-8, "({y1},{y2}): {k} vs {o}");
    }
}

#[test]
fn wl_contour_shift() {
    let q = QuadratureSpec::default();
    let mu = generic_mu();
    for (y1, y2) in [(0.05, 0.2), (2.0, 5.0)] {
        let p = KernelPoint::new(y1, y2).unwrap();
        let (s1, s2) = p.default_lines();
        let a = kernel_wl_on(&p, &mu, (s1, s2), &q).unwrap();
        let b = kernel_wl_on(&p, &mu, (s1 * 0.8, s2 * 1.25), &q).unwrap();
        assert!(rel(a, b) < 1e-6, "({y1},{y2}): {a} vs {b}");
    }
}

#[test]
fn wl_swap_symmetry() {
    // G(s₁, s₂; μ) = G(s₂, s₁; −μ) and S⁺⁺ is even in μ
    let q = QuadratureSpec::default();
    let mu = generic_mu();
    let a = kernel_wl(1.5, 0.4, &mu, &q).unwrap();
    let b = kernel_wl(0.4, 1.5, &mu.neg(), &q).unwrap();
    assert!(rel(a, b) < 1e-8, "{a} vs {b}");
}

#[test]
fn mixed_sign_kernels_report_slow_decay() {
    let q = QuadratureSpec::default();
    let mu = generic_mu();
    for (y1, y2) in [(1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        match kernel_wl(y1, y2, &mu, &q) {
            Err(Error::NonConvergence { .. }) => {}
            other => panic!("({y1},{y2}): {other:?}"),
        }
    }
}

#[test]
fn sign_dispatch_changes_only_trig_factor() {
    let mu = generic_mu();
    let (s1, s2) = (c(0.25, 1.7), c(0.25, -0.6));
    let plus = KernelPoint::new(2.0, 3.0).unwrap();
    let base = wl_integrand(&plus, s1, s2, &mu).unwrap();
    let s_pp = trig_factor(SignPattern::PlusPlus, s1, s2, &mu).unwrap();
    for (y1, y2, p) in [
        (-2.0, 3.0, SignPattern::MinusPlus),
        (2.0, -3.0, SignPattern::PlusMinus),
        (-2.0, -3.0, SignPattern::MinusMinus),
    ] {
        let pt = KernelPoint::new(y1, y2).unwrap();
        assert_eq!(pt.signs(), p);
        let v = wl_integrand(&pt, s1, s2, &mu).unwrap();
        let expect = base / s_pp * trig_factor(p, s1, s2, &mu).unwrap();
        assert!(rel(v, expect) < 1e-12);
    }
}

fn coarse() -> (TestFunctionSpec, QuadratureSpec) {
    let spec = TestFunctionSpec::with_default_direction(6.0, 0.5, 2).unwrap();
    (spec, QuadratureSpec::default().with_step(0.8))
}

#[test]
fn averaged_w4_matches_direct_lattice_sum() {
    let (spec, q) = coarse();
    let avg = KernelAverager::new(&spec, &q).unwrap();
    assert!(!avg.is_empty());
    for y in [30.0, -200.0] {
        let fast = avg.w4(&[y]).unwrap()[0];
        let direct = avg
            .average(|mu| Ok(spec_measure(mu)? * kernel_w4(y, mu, &q)?))
            .unwrap();
        assert!(rel(fast, direct) < 1e-7, "y={y}: {fast} vs {direct}");
    }
}

#[test]
fn w5_is_conjugate_of_w4() {
    let (spec, q) = coarse();
    let avg = KernelAverager::new(&spec, &q).unwrap();
    let ys = [36.0, -500.0];
    let a = avg.w4(&ys).unwrap();
    let b = avg.w5(&ys).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(rel(x.conj(), *y) < 1e-9, "{x} {y}");
    }
    let direct = avg
        .average(|mu| Ok(spec_measure(mu)? * kernel_w4(-36.0, &mu.neg(), &q)?))
        .unwrap();
    assert!(rel(b[0], direct) < 1e-7);
}

#[test]
fn averaged_wl_matches_direct_lattice_sum() {
    let (spec, q) = coarse();
    let avg = KernelAverager::new(&spec, &q).unwrap();
    let p = KernelPoint::diagonal(3.0).unwrap();
    let fast = avg.wl(&[p]).unwrap()[0];
    let qk = q.with_step(0.25);
    let direct = avg
        .average(|mu| {
            let k = kernel_wl_on(&p, mu, p.default_lines(), &qk)?;
            Ok(spec_measure(mu)? * k)
        })
        .unwrap();
    assert!(rel(fast, direct) < 1e-8, "{fast} vs {direct}");
}
