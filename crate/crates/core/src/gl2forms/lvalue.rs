use std::f64::consts::PI;

use super::{HolomorphicForm, MaassFormRecord, RAMANUJAN_EXPONENT};
use crate::arithmetic::primes_up_to;
use crate::numerics::{c, checked, ln_gamma, ln_gamma_r, scaled_upper_gamma, CompensatedSum, ComplexValue, QuadratureSpec};
use crate::{Error, Result};

/// Upper bound for the number of divisors of n, cheap and crude.
fn divisor_bound(n: usize) -> f64 {
    let mut count = 0.0;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            count += if d * d == n { 1.0 } else { 2.0 };
        }
        d += 1;
    }
    count
}

/// L(s, f) = Σ λ_f(n) n^{−s}, continued to all s.
///
/// Λ(s) = (2π)^{−s'}Γ(s')L(s) with s' = s + (k−1)/2 splits at y = 1 into
/// Σ a(n)[x^{−s'}Γ(s',x) + i^k x^{−(k−s')}Γ(k−s',x)], x = 2πn. Terms are
/// dropped once the Deligne bound for both halves, relative to the gamma
/// normalizer, is below tolerance/10.
pub fn l_value(f: &HolomorphicForm, s: ComplexValue, spec: &QuadratureSpec) -> Result<ComplexValue> {
    spec.validate()?;
    let k = f.weight() as f64;
    let sp = s + (k - 1.0) / 2.0;
    let dual = c(k, 0.0) - sp;
    let sign = if f.weight().is_multiple_of(4) { 1.0 } else { -1.0 };
    let ln_norm = ln_gamma(sp)? - sp * (2.0 * PI).ln();
    let inv_norm = (-ln_norm.re).exp();
    let cutoff = spec.tolerance / 10.0;
    // both incomplete gammas are monotone in x past this point
    let monotone_from = (sp.norm().max(dual.norm()) / (2.0 * PI)).ceil() as usize + 1;

    let mut sum = CompensatedSum::new();
    let mut n = 1usize;
    loop {
        let x = 2.0 * PI * n as f64;
        let g1 = scaled_upper_gamma(sp, x)?;
        let g2 = scaled_upper_gamma(dual, x)?;
        let size = (g1.norm() + g2.norm()) * inv_norm;
        let a_bound = divisor_bound(n) * (n as f64).powf((k - 1.0) / 2.0);
        if n >= monotone_from && a_bound * size < cutoff {
            break;
        }
        let a = f.a(n).ok_or(Error::InsufficientCoefficients {
            required: required_terms(n, sp, dual, inv_norm, k, cutoff)? as u64,
            available: f.n_max() as u64,
        })?;
        sum.add((g1 + g2 * sign) * a);
        n += 1;
    }
    checked(sum.value() * (-ln_norm).exp(), "L(s, f)")
}

fn required_terms(
    from: usize,
    sp: ComplexValue,
    dual: ComplexValue,
    inv_norm: f64,
    k: f64,
    cutoff: f64,
) -> Result<usize> {
    let mut n = from;
    loop {
        let x = 2.0 * PI * n as f64;
        let size = (scaled_upper_gamma(sp, x)?.norm() + scaled_upper_gamma(dual, x)?.norm()) * inv_norm;
        if divisor_bound(n) * (n as f64).powf((k - 1.0) / 2.0) * size < cutoff {
            return Ok(n - 1);
        }
        n += 1;
    }
}

/// A truncated Euler product together with a bound on the omitted factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedValue {
    pub value: ComplexValue,
    pub tail_bound: f64,
    pub prime_limit: u64,
}

/// L(s, f) as the Euler product over every prime in the coefficient table, Re s ≥ 1.5.
///
/// On lines far right of the critical strip this beats [`l_value`] when the
/// values feed a badly conditioned contour integral: the omitted factors are
/// exact Dirichlet-series terms rather than unstructured rounding.
pub fn euler_l_value(f: &HolomorphicForm, s: ComplexValue) -> Result<TruncatedValue> {
    if s.re < 1.5 {
        return Err(Error::InvalidInput(format!("Euler product for L(s, f) needs Re s ≥ 1.5, got {}", s.re)));
    }
    let prime_limit = f.n_max() as u64;
    if prime_limit < 2 {
        return Err(Error::InsufficientCoefficients {
            required: 2,
            available: prime_limit,
        });
    }
    let mut log = CompensatedSum::new();
    for p in primes_up_to(prime_limit as usize) {
        let x = c(p as f64, 0.0).powc(-s);
        let local = 1.0 - x * (f.try_lambda(p as usize)? - x);
        log.add(-local.ln());
    }
    let value = checked(log.value().exp(), "L(s, f)")?;
    // Deligne: |log L_p| ≤ 2p^{−σ}/(1 − p^{−σ}), summed with π(x) ≤ 1.26x/ln x
    let (pl, sigma) = (prime_limit as f64, s.re);
    let tail = 2.0 / (1.0 - pl.powf(-sigma)) * 1.26 * pl.powf(1.0 - sigma) / ((sigma - 1.0) * pl.ln());
    Ok(TruncatedValue {
        value,
        tail_bound: value.norm() * (tail.exp() - 1.0),
        prime_limit,
    })
}

/// L(s, f⊗g) over the primes covered by both tables, Re s ≥ 1.1.
pub fn rankin_selberg_gl2_value(f: &HolomorphicForm, g: &MaassFormRecord, s: ComplexValue) -> Result<TruncatedValue> {
    let limit = g
        .largest_prime()
        .ok_or(Error::MissingPrime(2))?
        .min(f.n_max() as u64);
    rankin_selberg_truncated(f, g, s, limit)
}

/// L(s, f⊗g) as the Euler product over p ≤ prime_limit.
pub fn rankin_selberg_truncated(
    f: &HolomorphicForm,
    g: &MaassFormRecord,
    s: ComplexValue,
    prime_limit: u64,
) -> Result<TruncatedValue> {
    if s.re < 1.1 {
        return Err(Error::InvalidInput(format!(
            "Rankin-Selberg product needs Re s ≥ 1.1, got {}",
            s.re
        )));
    }
    if prime_limit < 2 {
        return Err(Error::InvalidInput("prime limit below 2".into()));
    }
    let mut log = CompensatedSum::new();
    for p in primes_up_to(prime_limit as usize) {
        let lf = f.try_lambda(p as usize)?;
        let lg = g.lambda_prime(p)?;
        let x = c(p as f64, 0.0).powc(-s);
        let (e1, e2) = (lf * lg, lf * lf + lg * lg - 2.0);
        let local = 1.0 - x * (e1 - x * (e2 - x * (e1 - x)));
        log.add(-local.ln());
    }
    let value = checked(log.value().exp(), "L(s, f⊗g)")?;
    Ok(TruncatedValue {
        value,
        tail_bound: value.norm() * (tail_log_bound(prime_limit as f64, s.re).exp() - 1.0),
        prime_limit,
    })
}

/// Bound for Σ_{p>P} |log L_p| with |αβ| ≤ p^θ, θ the Maass exponent.
fn tail_log_bound(p: f64, sigma: f64) -> f64 {
    let a = sigma - RAMANUJAN_EXPONENT;
    let r = p.powf(-a);
    // Σ_{p>P} p^{−a} ≤ 1.26 P^{1−a}/((a−1) ln P) from π(x) ≤ 1.26x/ln x
    4.0 / (1.0 - r) * 1.26 * p.powf(1.0 - a) / ((a - 1.0) * p.ln())
}


/// G(w) = exp(w²/B − iθw) with θ = (π/2)sgn(Im s) once |Im s| > t, else 0.
///
/// With G = 1 the quotient γ(s+w)/γ(s) grows like e^{π|v|/2} on a band of
/// width |Im s| − t below (or above) Im w = 0, and the truncated contour
/// misses it. The rotation cancels that growth; the Gaussian closes the
/// contour on the other side without slowing the decay in y much.
#[derive(Debug, Clone, Copy)]
struct Smoothing {
    theta: f64,
}

const SMOOTHING_B: f64 = 16.0;
/// |G| times the gamma quotient is below e^{−50} past this height.
const MAASS_KERNEL_HEIGHT: f64 = 30.0;

impl Smoothing {
    fn new(t: f64, s: ComplexValue) -> Self {
        let theta = if s.im.abs() > t.abs() { PI / 2.0 * s.im.signum() } else { 0.0 };
        Self { theta }
    }

    fn ln_at(self, w: ComplexValue) -> ComplexValue {
        w * w / SMOOTHING_B - c(0.0, self.theta) * w
    }
}

/// Contour for W(y) = (1/2πi)∫_(2) y^{−w} γ(s+w)/γ(s) G(±w) dw/w,
/// γ(s) = Γ_R(s+it)Γ_R(s−it); the dual half takes G(−w).
struct MaassKernel {
    table: Vec<(ComplexValue, ComplexValue)>,
    step: f64,
}

impl MaassKernel {
    fn new(t: f64, s: ComplexValue, g: Smoothing, dual: bool, spec: &QuadratureSpec) -> Result<Self> {
        let ln_gamma_factor = |z: ComplexValue| -> Result<ComplexValue> {
            Ok(ln_gamma_r(z + c(0.0, t))? + ln_gamma_r(z - c(0.0, t))?)
        };
        let base = ln_gamma_factor(s)?;
        let step = spec.step;
        let nodes = (MAASS_KERNEL_HEIGHT / step).ceil() as i64;
        let mut table = Vec::with_capacity(2 * nodes as usize + 1);
        for j in -nodes..=nodes {
            let w = c(2.0, j as f64 * step);
            let ln_g = g.ln_at(if dual { -w } else { w });
            table.push((w, (ln_gamma_factor(s + w)? - base + ln_g).exp() / w));
        }
        Ok(Self { table, step })
    }

    fn pair(g: &MaassFormRecord, s: ComplexValue, spec: &QuadratureSpec) -> Result<(Self, Self)> {
        let smoothing = Smoothing::new(g.t_g, s);
        Ok((
            Self::new(g.t_g, s, smoothing, false, spec)?,
            Self::new(g.t_g, c(1.0, 0.0) - s, smoothing, true, spec)?,
        ))
    }

    fn weight(&self, n: usize) -> ComplexValue {
        let ly = (n as f64).ln();
        let sum: CompensatedSum = self.table.iter().map(|&(w, g)| g * (-w * ly).exp()).collect();
        sum.value() * self.step / (2.0 * PI)
    }

    fn weights(&self, n_terms: usize) -> Vec<ComplexValue> {
        (1..=n_terms).map(|n| self.weight(n)).collect()
    }
}

/// L(s, g) for an even level-one Maass form from its prime eigenvalues.
///
/// Uses the balanced expansion with smoothed weights; the number
/// of terms doubles until both weights drop below the tolerance, so every
/// prime up to that point must be present in the record.
pub fn maass_l_value(g: &MaassFormRecord, s: ComplexValue, spec: &QuadratureSpec) -> Result<ComplexValue> {
    spec.validate()?;
    let (w, wd) = MaassKernel::pair(g, s, spec)?;
    let mut n = 4;
    loop {
        let size = w.weight(n).norm().max(wd.weight(n).norm());
        if size < spec.tolerance / 10.0 {
            return maass_sum(g, s, &w, &wd, n);
        }
        n *= 2;
        if n > 1 << 16 {
            return Err(Error::NonConvergence {
                what: "smoothed Maass L-series",
                tail: size,
                tolerance: spec.tolerance,
            });
        }
    }
}

/// The smoothed expansion with exactly `n_terms` terms in each half.
pub fn maass_l_value_truncated(
    g: &MaassFormRecord,
    s: ComplexValue,
    spec: &QuadratureSpec,
    n_terms: usize,
) -> Result<ComplexValue> {
    spec.validate()?;
    let (w, wd) = MaassKernel::pair(g, s, spec)?;
    maass_sum(g, s, &w, &wd, n_terms)
}

fn maass_sum(
    g: &MaassFormRecord,
    s: ComplexValue,
    kernel: &MaassKernel,
    dual_kernel: &MaassKernel,
    n_terms: usize,
) -> Result<ComplexValue> {
    let t = g.t_g;
    let dual = c(1.0, 0.0) - s;
    let w = kernel.weights(n_terms);
    let wd = dual_kernel.weights(n_terms);
    let ln_gamma_factor = |z: ComplexValue| -> Result<ComplexValue> {
        Ok(ln_gamma_r(z + c(0.0, t))? + ln_gamma_r(z - c(0.0, t))?)
    };
    let ratio = (ln_gamma_factor(dual)? - ln_gamma_factor(s)?).exp();
    let mut first = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    for n in 1..=n_terms {
        let l = g.lambda_at(n as u64)?;
        let x = n as f64;
        first.add(w[n - 1] * l * c(x, 0.0).powc(-s));
        second.add(wd[n - 1] * l * c(x, 0.0).powc(-dual));
    }
    checked(first.value() + ratio * second.value(), "L(s, g)")
}
