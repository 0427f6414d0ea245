//! Special functions and deterministic quadrature.

mod bessel;
mod gamma;
mod incgamma;
mod kronrod;
pub mod quadrature;
mod sum;
mod zeta;

pub use bessel::bessel_j;
pub use gamma::{gamma, gamma_r, ln_gamma, ln_gamma_r, ln_sin_pi};
pub use incgamma::{incomplete_gamma_upper, scaled_upper_gamma};
pub use kronrod::adaptive_gauss_kronrod;
pub use quadrature::{
    spectral_plane_integral, vertical_line_integral, PlaneDomain, QuadratureSpec, Scheme,
};
pub use sum::{CompensatedSum, RealSum};
pub use zeta::riemann_zeta;

use crate::{Error, Result};

pub use num_complex::Complex64 as ComplexValue;

pub const I: ComplexValue = ComplexValue::new(0.0, 1.0);

pub(crate) fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

/// NaN or infinite components are treated as overflow.
pub fn checked(z: ComplexValue, what: &'static str) -> Result<ComplexValue> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Overflow(what))
    }
}

/// Nearest non-positive integer to `z` if `z` lies within `tol` of it.
pub(crate) fn near_nonpositive_integer(z: ComplexValue, tol: f64) -> bool {
    if z.re > tol {
        return false;
    }
    let n = z.re.round();
    (z - ComplexValue::new(n, 0.0)).norm() <= tol
}

/// tan(z) without overflow for large |Im z|.
pub fn tan_stable(z: ComplexValue) -> ComplexValue {
    let (x2, y2) = (2.0 * z.re, 2.0 * z.im);
    let e = (-y2.abs()).exp();
    // 1/cosh(2y) and tanh(2y) in a form that never overflows
    let sech = 2.0 * e / (1.0 + e * e);
    let tanh = (1.0 - e * e) / (1.0 + e * e) * y2.signum();
    let den = x2.cos() * sech + 1.0;
    ComplexValue::new(x2.sin() * sech / den, tanh / den)
}
