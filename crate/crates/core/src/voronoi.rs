//! Both sides of GL(2) Voronoi summation for a level-one eigenform:
//! Σ λ(m)e(am/c)F(m) = (1/c) Σ λ(n)e(−ān/c)G(n), with
//! G(y) = 2πi^k ∫ F(x) J_{k−1}(4π√(xy)/c) dx.

use std::f64::consts::PI;

use crate::arithmetic::{e_frac, gcd, mod_inverse};
use crate::gl2forms::HolomorphicForm;
use crate::numerics::{adaptive_gauss_kronrod, bessel_j, CompensatedSum, ComplexValue, QuadratureSpec};
use crate::{Error, Result};

/// Largest dual index tried before giving up on decay of G.
pub const MAX_DUAL_TERMS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowShape {
    /// exp(−(32/9)((x−c)/w)²): below e^{−32} beyond three widths.
    Gaussian,
    /// (1 − u²)¹², u = (x−c)/(3w), supported on exactly three widths.
    PolynomialBump,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestWindow {
    center: f64,
    width: f64,
    shape: WindowShape,
}

impl TestWindow {
    pub fn new(center: f64, width: f64, shape: WindowShape) -> Result<Self> {
        if !(width > 0.0 && center.is_finite() && width.is_finite()) || center - 3.0 * width <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "window [{center} ± 3·{width}] must lie in (0, ∞)"
            )));
        }
        Ok(Self { center, width, shape })
    }

    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        Self::new(center, width, WindowShape::Gaussian)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn shape(&self) -> WindowShape {
        self.shape
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.shape {
            WindowShape::Gaussian => {
                let u = (x - self.center) / self.width;
                (-(32.0 / 9.0) * u * u).exp()
            }
            WindowShape::PolynomialBump => {
                let u = (x - self.center) / (3.0 * self.width);
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - u * u).powi(12)
                }
            }
        }
    }

    /// Interval carrying F up to e^{−128} relative.
    pub fn support(&self) -> (f64, f64) {
        let reach = match self.shape {
            WindowShape::Gaussian => 6.0,
            WindowShape::PolynomialBump => 3.0,
        };
        ((self.center - reach * self.width).max(0.0), self.center + reach * self.width)
    }
}

fn check_modulus(a: i64, modulus: i64) -> Result<()> {
    if modulus < 1 {
        return Err(Error::InvalidInput(format!("modulus {modulus} must be positive")));
    }
    if gcd(a, modulus) != 1 {
        return Err(Error::NotCoprime { a, m: modulus });
    }
    Ok(())
}

/// Σ_m λ_f(m) e(am/c) F(m) over the window's support.
pub fn voronoi_lhs(f: &HolomorphicForm, a: i64, modulus: i64, window: &TestWindow) -> Result<ComplexValue> {
    check_modulus(a, modulus)?;
    let (lo, hi) = window.support();
    let first = (lo.ceil() as u64).max(1);
    let last = hi.floor() as u64;
    let mut sum = CompensatedSum::new();
    for m in first..=last {
        let l = f.try_lambda(m as usize)?;
        sum.add(e_frac(a * m as i64, modulus) * (l * window.eval(m as f64)));
    }
    Ok(sum.value())
}

/// 2πi^k ∫ F(x) J_{k−1}(4π√(xy)/c) dx.
pub fn bessel_transform(k: u32, modulus: i64, window: &TestWindow, y: f64, tolerance: f64) -> Result<f64> {
    let (lo, hi) = window.support();
    let scale = 4.0 * PI * y.sqrt() / modulus as f64;
    // about one panel per half oscillation of the Bessel factor
    let oscillations = scale * (hi.sqrt() - lo.sqrt()) / PI;
    let panels = (oscillations.ceil() as usize).clamp(8, 4096);
    let integral = adaptive_gauss_kronrod(
        |x| window.eval(x) * bessel_j(k - 1, scale * x.sqrt()),
        lo,
        hi,
        tolerance / (2.0 * PI),
        panels,
    )?;
    let ik = if k.is_multiple_of(4) { 1.0 } else { -1.0 };
    Ok(2.0 * PI * ik * integral)
}

/// The dual side together with where the n-sum stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiDual {
    pub value: ComplexValue,
    /// Last dual index included.
    pub truncation: u64,
    /// False when G(n) had not decayed below tolerance by [`MAX_DUAL_TERMS`].
    pub decayed: bool,
}

/// (1/c) Σ_n λ_f(n) e(−ān/c) G(n), truncated once |G(n)|·max|λ| stays below tolerance.
pub fn voronoi_rhs(
    f: &HolomorphicForm,
    a: i64,
    modulus: i64,
    window: &TestWindow,
    q: &QuadratureSpec,
) -> Result<VoronoiDual> {
    check_modulus(a, modulus)?;
    let a_bar = mod_inverse(a.rem_euclid(modulus), modulus)?;
    let k = f.weight();
    let tol = q.tolerance;
    // below this n the Bessel argument is under its order somewhere in the
    // window, where G can be small without having started to decay
    let onset = (k as f64 * modulus as f64 / (4.0 * PI)).powi(2) / (window.center() - 3.0 * window.width());
    let block = 32u64;
    let mut sum = CompensatedSum::new();
    let mut n = 1u64;
    loop {
        let ids: Vec<u64> = (n..n + block).collect();
        let values = crate::par::map(&ids, |&m| bessel_transform(k, modulus, window, m as f64, tol * 1e-2));
        let mut lambdas = Vec::with_capacity(ids.len());
        for &m in &ids {
            lambdas.push(f.try_lambda(m as usize)?);
        }
        let lambda_max = lambdas.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        let mut quiet = true;
        for ((&m, g), l) in ids.iter().zip(values).zip(lambdas) {
            let g = g?;
            if g.abs() * lambda_max >= tol {
                quiet = false;
            }
            sum.add(e_frac(-a_bar * m as i64, modulus) * (l * g));
        }
        let last = n + block - 1;
        if quiet && last as f64 > onset {
            return Ok(VoronoiDual {
                value: sum.value() / modulus as f64,
                truncation: last,
                decayed: true,
            });
        }
        n += block;
        if last >= MAX_DUAL_TERMS || last as usize >= f.n_max() {
            return Ok(VoronoiDual {
                value: sum.value() / modulus as f64,
                truncation: last,
                decayed: false,
            });
        }
    }
}

/// Largest relative deviation in d/dy((R√y)^{s+1}J_{s+1}(R√y)) = (R²/2)(R√y)^s J_s(R√y)
/// over y ∈ [1, 10], derivative by central differences of the given step.
pub fn bessel_recurrence_check_with_step(k: u32, r: f64, samples: usize, step: f64) -> Result<f64> {
    if k > 60 {
        return Err(Error::InvalidInput(format!("order {k} above 60")));
    }
    let n = samples.max(2);
    let lhs_fn = |y: f64| {
        let z = r * y.sqrt();
        z.powi(k as i32 + 1) * bessel_j(k + 1, z)
    };
    let mut worst = 0.0f64;
    for j in 0..n {
        let y = 1.0 + 9.0 * j as f64 / (n - 1) as f64;
        let lhs = (lhs_fn(y + step) - lhs_fn(y - step)) / (2.0 * step);
        let z = r * y.sqrt();
        let rhs = r * r / 2.0 * z.powi(k as i32) * bessel_j(k, z);
        let dev = (lhs - rhs).abs();
        if dev > 0.0 {
            worst = worst.max(dev / rhs.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// [`bessel_recurrence_check_with_step`] at step 10⁻⁴.
pub fn bessel_recurrence_check(k: u32, r: f64, samples: usize) -> Result<f64> {
    bessel_recurrence_check_with_step(k, r, samples, 1e-4)
}
