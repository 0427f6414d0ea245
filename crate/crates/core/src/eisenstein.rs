//! Hecke coefficients and normalizers of the minimal and maximal Eisenstein
//! series for SL₃(ℤ).

use crate::arithmetic::{divisors, factorize, gcd, mobius};
use crate::gl2forms::{maass_l_value, MaassFormRecord};
use crate::numerics::{c, riemann_zeta, ComplexValue, QuadratureSpec};
use crate::spectral::LanglandsParameter;
use crate::{Error, Result};

/// Largest m·n accepted by the coefficient functions.
pub const MAX_INDEX_PRODUCT: u64 = 1_000_000;

const UNITARY_TOL: f64 = 1e-12;

fn pow_neg(p: u64, z: ComplexValue) -> ComplexValue {
    // p^{−z}
    (-z * (p as f64).ln()).exp()
}

fn check_range(m: u64, n: u64) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("Hecke indices start at 1".into()));
    }
    if m.saturating_mul(n) > MAX_INDEX_PRODUCT {
        return Err(Error::InvalidInput(format!(
            "m·n = {} exceeds {MAX_INDEX_PRODUCT}",
            m as u128 * n as u128
        )));
    }
    Ok(())
}

/// A(m₁,m₂) = Σ_{d|(m₁,m₂)} μ(d) conj(A(1,m₁/d)) A(1,m₂/d).
fn hecke_combine<F>(m: u64, n: u64, one_n: F) -> Result<ComplexValue>
where
    F: Fn(u64) -> Result<ComplexValue>,
{
    let g = gcd(m as i64, n as i64) as u64;
    let mut out = c(0.0, 0.0);
    for d in divisors(g) {
        let mu = mobius(d);
        if mu == 0 {
            continue;
        }
        out += one_n(m / d)?.conj() * one_n(n / d)? * mu as f64;
    }
    Ok(out)
}

/// Minimal-parabolic Eisenstein series with Langlands parameter μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalEisenstein {
    pub param: LanglandsParameter,
}

impl MinimalEisenstein {
    pub fn new(param: LanglandsParameter) -> Self {
        Self { param }
    }

    /// A(1, n) = Σ_{d₁d₂d₃=n} Π d_j^{−μ_j}, assembled prime by prime.
    pub fn a_one(&self, n: u64) -> ComplexValue {
        let mu = self.param.mu;
        let mut out = c(1.0, 0.0);
        for (p, e) in factorize(n) {
            let x = [pow_neg(p, mu[0]), pow_neg(p, mu[1]), pow_neg(p, mu[2])];
            out *= complete_homogeneous(&x, e);
        }
        out
    }
}

/// h_e(x₁,x₂,x₃) = Σ_{a+b+c=e} x₁^a x₂^b x₃^c.
fn complete_homogeneous(x: &[ComplexValue; 3], e: u32) -> ComplexValue {
    // h over (x₂, x₃) for every degree, then fold in x₁
    let mut two = vec![c(0.0, 0.0); e as usize + 1];
    for (k, slot) in two.iter_mut().enumerate() {
        let mut acc = c(0.0, 0.0);
        for b in 0..=k {
            acc += x[1].powu(b as u32) * x[2].powu((k - b) as u32);
        }
        *slot = acc;
    }
    (0..=e as usize)
        .map(|a| x[0].powu(a as u32) * two[e as usize - a])
        .sum()
}

/// A^min(m, n); any m > 1 needs Re μ = 0.
pub fn a_min(e: &MinimalEisenstein, m: u64, n: u64) -> Result<ComplexValue> {
    check_range(m, n)?;
    if m == 1 {
        return Ok(e.a_one(n));
    }
    if !e.param.is_unitary(UNITARY_TOL) {
        return Err(Error::OffAxis("A^min(m, n) with m > 1"));
    }
    hecke_combine(m, n, |k| Ok(e.a_one(k)))
}

/// (1/16)Π|ζ(1+3ν_j)|².
pub fn min_normalizer(e: &MinimalEisenstein) -> Result<f64> {
    let mut out = 1.0 / 16.0;
    for nu in e.param.nu() {
        if (3.0 * nu).norm() < 1e-8 {
            return Err(Error::pole("zeta(1+3ν)", 1.0 + 3.0 * nu));
        }
        out *= riemann_zeta(1.0 + 3.0 * nu)?.norm_sqr();
    }
    Ok(out)
}

/// Coefficients of ζ(s+μ₁)ζ(s+μ₂)ζ(s+μ₃) by triple convolution, n = 1..=n_max.
fn triple_zeta_coefficients(mu: &[ComplexValue; 3], n_max: usize) -> Vec<ComplexValue> {
    let single = |z: ComplexValue| -> Vec<ComplexValue> {
        (0..=n_max)
            .map(|n| if n == 0 { c(0.0, 0.0) } else { pow_neg(n as u64, z) })
            .collect()
    };
    let conv = |a: &[ComplexValue], b: &[ComplexValue]| -> Vec<ComplexValue> {
        let mut out = vec![c(0.0, 0.0); n_max + 1];
        for i in 1..=n_max {
            for j in 1..=n_max / i {
                out[i * j] += a[i] * b[j];
            }
        }
        out
    };
    let ab = conv(&single(mu[0]), &single(mu[1]));
    conv(&ab, &single(mu[2]))
}

/// max_n |A^min(1,n) − [n^{−s}]ζ(s+μ₁)ζ(s+μ₂)ζ(s+μ₃)| over n ≤ N.
pub fn factorization_check_min(e: &MinimalEisenstein, n_max: usize) -> Result<f64> {
    if n_max == 0 || n_max > 10_000 {
        return Err(Error::InvalidInput(format!("N = {n_max} outside 1..=10000")));
    }
    let reference = triple_zeta_coefficients(&e.param.mu, n_max);
    Ok((1..=n_max)
        .map(|n| (e.a_one(n as u64) - reference[n]).norm())
        .fold(0.0, f64::max))
}

/// Maximal-parabolic Eisenstein series induced from a Maass form g.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalEisenstein {
    pub u: ComplexValue,
    pub g: MaassFormRecord,
}

impl MaximalEisenstein {
    pub fn new(u: ComplexValue, g: MaassFormRecord) -> Self {
        Self { u, g }
    }

    /// (u + it_g, u − it_g, −2u)
    pub fn param(&self) -> LanglandsParameter {
        let t = c(0.0, self.g.t_g);
        LanglandsParameter {
            mu: [self.u + t, self.u - t, -2.0 * self.u],
        }
    }

    fn is_unitary(&self) -> bool {
        self.u.re.abs() <= UNITARY_TOL
    }

    /// A(1, n) = Σ_{d₁d₂=n} λ_g(d₁) d₁^{−u} d₂^{2u}.
    pub fn a_one(&self, n: u64) -> Result<ComplexValue> {
        let mut out = c(1.0, 0.0);
        for (p, e) in factorize(n) {
            let mut local = c(0.0, 0.0);
            for i in 0..=e {
                let pi = p.pow(i);
                let pj = p.pow(e - i);
                local += self.g.lambda_at(pi)? * pow_neg(pi, self.u) * pow_neg(pj, -2.0 * self.u);
            }
            out *= local;
        }
        Ok(out)
    }
}

/// A^max(m, n); any m > 1 needs Re u = 0.
pub fn a_max(e: &MaximalEisenstein, m: u64, n: u64) -> Result<ComplexValue> {
    check_range(m, n)?;
    if m == 1 {
        return e.a_one(n);
    }
    if !e.is_unitary() {
        return Err(Error::OffAxis("A^max(m, n) with m > 1"));
    }
    hecke_combine(m, n, |k| e.a_one(k))
}

/// 8·L(1, Ad² g)·|L(1+3u, g)|².
pub fn max_normalizer(e: &MaximalEisenstein, spec: &QuadratureSpec) -> Result<f64> {
    let l = maass_l_value(&e.g, 1.0 + 3.0 * e.u, spec)?;
    Ok(8.0 * e.g.ad2_value * l.norm_sqr())
}

/// max_n |A^max(1,n) − [n^{−s}]ζ(s−2u)L(s+u,g)| over n ≤ N.
pub fn factorization_check_max(e: &MaximalEisenstein, n_max: usize) -> Result<f64> {
    if n_max == 0 || n_max > 10_000 {
        return Err(Error::InvalidInput(format!("N = {n_max} outside 1..=10000")));
    }
    let mut lg = vec![c(0.0, 0.0); n_max + 1];
    for (n, slot) in lg.iter_mut().enumerate().skip(1) {
        *slot = e.g.lambda_at(n as u64)? * pow_neg(n as u64, e.u);
    }
    let mut reference = vec![c(0.0, 0.0); n_max + 1];
    for d1 in 1..=n_max {
        for d2 in 1..=n_max / d1 {
            reference[d1 * d2] += lg[d1] * pow_neg(d2 as u64, -2.0 * e.u);
        }
    }
    let mut worst = 0.0f64;
    for (n, r) in reference.iter().enumerate().skip(1) {
        worst = worst.max((e.a_one(n as u64)? - r).norm());
    }
    Ok(worst)
}
