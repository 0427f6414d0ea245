//! Complex log-gamma by the Lanczos approximation with g = 7 and nine
//! coefficients, reflected for Re z < 1/2.

use super::{c, near_nonpositive_integer, ComplexValue, I};
use crate::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// log Γ(z), continuous off the non-positive real axis and real on the
/// positive axis.
pub fn ln_gamma(z: ComplexValue) -> Result<ComplexValue> {
    if near_nonpositive_integer(z, 1e-14) {
        return Err(Error::pole("log_gamma", z));
    }
    if z.re < 0.5 {
        // log Γ(z) = log π − log sin(πz) − log Γ(1−z)
        return Ok(c(LN_PI, 0.0) - ln_sin_pi(z) - lanczos(c(1.0, 0.0) - z));
    }
    Ok(lanczos(z))
}

fn lanczos(z: ComplexValue) -> ComplexValue {
    let z = z - 1.0;
    let mut a = c(LANCZOS[0], 0.0);
    for (k, &coef) in LANCZOS.iter().enumerate().skip(1) {
        a += coef / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    c(LN_SQRT_2PI, 0.0) + (z + 0.5) * t.ln() - t + a.ln()
}

/// log sin(πz) evaluated without overflow for large |Im z|.
pub fn ln_sin_pi(z: ComplexValue) -> ComplexValue {
    if z.im > 0.0 {
        // sin πz = (i/2) e^{−iπz} (1 − e^{2πiz})
        let w = (2.0 * PI * I * z).exp();
        c(-std::f64::consts::LN_2, PI / 2.0) - PI * I * z + (c(1.0, 0.0) - w).ln()
    } else if z.im < 0.0 {
        let w = (-2.0 * PI * I * z).exp();
        c(-std::f64::consts::LN_2, -PI / 2.0) + PI * I * z + (c(1.0, 0.0) - w).ln()
    } else {
        let s = (PI * reduce_half_period(z.re)).sin();
        c(s.abs().ln(), if s < 0.0 { PI } else { 0.0 })
    }
}

// x mod 2 in (−1, 1], exact for the subtraction of an even integer
fn reduce_half_period(x: f64) -> f64 {
    x - 2.0 * (x / 2.0).round()
}

pub fn gamma(z: ComplexValue) -> Result<ComplexValue> {
    super::checked(ln_gamma(z)?.exp(), "gamma")
}

/// log Γ_R(s) = −(s/2) log π + log Γ(s/2).
pub fn ln_gamma_r(s: ComplexValue) -> Result<ComplexValue> {
    let half = s * 0.5;
    if near_nonpositive_integer(half, 1e-14) {
        return Err(Error::pole("gamma_r", s));
    }
    Ok(-half * LN_PI + ln_gamma(half)?)
}

/// Γ_R(s) = π^{−s/2} Γ(s/2).
pub fn gamma_r(s: ComplexValue) -> Result<ComplexValue> {
    super::checked(ln_gamma_r(s)?.exp(), "gamma_r")
}
