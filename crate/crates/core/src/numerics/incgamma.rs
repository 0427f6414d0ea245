//! Upper incomplete gamma Γ(s, x) for complex s and real x > 0.
//!
//! Legendre's continued fraction (modified Lentz) when x > Re s + 1 or when s
//! sits on a pole of Γ, otherwise Γ(s) minus the power series of γ(s, x).

use super::{c, checked, ln_gamma, near_nonpositive_integer, ComplexValue};
use crate::{Error, Result};

const TINY: f64 = 1e-300;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;

/// Γ(s, x) = ∫ₓ^∞ t^{s−1} e^{−t} dt.
pub fn incomplete_gamma_upper(s: ComplexValue, x: f64) -> Result<ComplexValue> {
    let scaled = scaled_upper_gamma(s, x)?;
    checked((s * x.ln()).exp() * scaled, "incomplete_gamma_upper")
}

/// x^{−s} Γ(s, x) = ∫₁^∞ e^{−xy} y^{s−1} dy, which stays representable when
/// x^s alone would not.
pub fn scaled_upper_gamma(s: ComplexValue, x: f64) -> Result<ComplexValue> {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return Err(Error::InvalidInput(format!("incomplete gamma needs x > 0, got {x}")));
    }
    let on_pole = near_nonpositive_integer(s, 1e-10);
    let value = if x > s.re + 1.0 || on_pole {
        (-x).exp() * continued_fraction(s, x)?
    } else {
        let lead = (ln_gamma(s)? - s * x.ln()).exp();
        lead - (-x).exp() * lower_series(s, x)?
    };
    checked(value, "incomplete_gamma_upper")
}

// 1/(x+1−s− 1(1−s)/(x+3−s− 2(2−s)/(x+5−s− …)))
fn continued_fraction(s: ComplexValue, x: f64) -> Result<ComplexValue> {
    let one = c(1.0, 0.0);
    let mut b = c(x + 1.0, 0.0) - s;
    let mut cc = c(1.0 / TINY, 0.0);
    let mut d = one / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (c(i as f64, 0.0) - s);
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = c(TINY, 0.0);
        }
        cc = b + an / cc;
        if cc.norm() < TINY {
            cc = c(TINY, 0.0);
        }
        d = one / d;
        let delta = d * cc;
        h *= delta;
        if (delta - one).norm() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        what: "incomplete gamma continued fraction",
        tail: f64::NAN,
        tolerance: EPS,
    })
}

// Σ x^n / (s(s+1)…(s+n))
fn lower_series(s: ComplexValue, x: f64) -> Result<ComplexValue> {
    let mut term = c(1.0, 0.0) / s;
    let mut sum = term;
    for n in 1..MAX_ITER {
        term *= x / (s + n as f64);
        sum += term;
        if term.norm() < EPS * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        what: "incomplete gamma series",
        tail: term.norm(),
        tolerance: EPS,
    })
}
