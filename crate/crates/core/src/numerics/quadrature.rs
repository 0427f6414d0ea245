//! Vertical-line and spectral-plane quadrature.
//!
//! All sums are accumulated in a fixed order (ascending |Im| on lines, lattice
//! order on the plane) with compensation, so a given spec gives bit-identical
//! results whatever the thread count.

use super::{ComplexValue, CompensatedSum};
use crate::par;
use crate::spectral::LanglandsParameter;
use crate::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Trapezoid,
    /// sinh–sinh substitution t = sinh(π/2·sinh u); `step` is the step in u.
    DoubleExponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub step: f64,
    /// Lines are truncated at |Im s| ≤ height.
    pub height: f64,
    /// Target absolute error.
    pub tolerance: f64,
    pub scheme: Scheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            step: 0.05,
            height: 40.0,
            tolerance: 1e-10,
            scheme: Scheme::Trapezoid,
        }
    }
}

impl QuadratureSpec {
    pub fn new(step: f64, height: f64, tolerance: f64, scheme: Scheme) -> Result<Self> {
        let spec = Self {
            step,
            height,
            tolerance,
            scheme,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.step > 0.0
            && self.height > 0.0
            && self.step < self.height
            && self.tolerance > 0.0
            && self.step.is_finite()
            && self.height.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad quadrature spec {self:?}")))
        }
    }

    pub fn with_step(self, step: f64) -> Self {
        Self { step, ..self }
    }

    pub fn with_height(self, height: f64) -> Self {
        Self { height, ..self }
    }

    pub fn with_tolerance(self, tolerance: f64) -> Self {
        Self { tolerance, ..self }
    }

    /// Half the step and twice the height, for convergence checks.
    pub fn refined(self) -> Self {
        Self {
            step: self.step / 2.0,
            height: self.height * 2.0,
            ..self
        }
    }
}

// nodes are generated in blocks of this many |k| values
const BLOCK: usize = 64;
// a node is negligible below this fraction of the largest integrand value seen
const NEGLIGIBLE: f64 = 1e-18;

/// (1/2πi) ∫ f(s) ds along Re s = sigma, truncated at |Im s| ≤ height.
pub fn vertical_line_integral<F>(f: F, sigma: f64, spec: &QuadratureSpec) -> Result<ComplexValue>
where
    F: Fn(ComplexValue) -> Result<ComplexValue> + Sync + Send,
{
    spec.validate()?;
    // node k ↦ (Im s, dt weight)
    let node = |k: i64| -> (f64, f64) {
        let kf = k as f64;
        match spec.scheme {
            Scheme::Trapezoid => (kf * spec.step, spec.step),
            Scheme::DoubleExponential => {
                let u = kf * spec.step;
                let inner = 0.5 * PI * u.sinh();
                (inner.sinh(), spec.step * 0.5 * PI * u.cosh() * inner.cosh())
            }
        }
    };
    let eval = |k: i64| -> Result<(ComplexValue, f64)> {
        let (t, w) = node(k);
        let v = f(ComplexValue::new(sigma, t))?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Overflow("vertical_line_integral integrand"));
        }
        Ok((v * w, v.norm()))
    };

    let mut sum = CompensatedSum::new();
    let (v0, m0) = eval(0)?;
    sum.add(v0);
    let mut peak = m0;
    let mut edge = m0;
    let mut quiet_run = 0usize;
    let mut k = 1i64;
    loop {
        let ks: Vec<i64> = (k..k + BLOCK as i64)
            .take_while(|&k| node(k).0 <= spec.height)
            .collect();
        if ks.is_empty() {
            break;
        }
        let vals = par::try_map_range(ks.len(), |i| Ok((eval(ks[i])?, eval(-ks[i])?)))?;
        let mut stop = false;
        for ((vp, mp), (vm, mm)) in vals {
            sum.add(vp);
            sum.add(vm);
            let m = mp.max(mm);
            peak = peak.max(m);
            edge = mp + mm;
            if m <= NEGLIGIBLE * peak {
                quiet_run += 1;
                if quiet_run >= 32 {
                    stop = true;
                }
            } else {
                quiet_run = 0;
            }
        }
        k += ks.len() as i64;
        if stop {
            break;
        }
    }
    // integrand size at the cut over a unit length, scaled like the result
    let tail = edge / (2.0 * PI);
    if tail > spec.tolerance && quiet_run < 32 {
        return Err(Error::NonConvergence {
            what: "vertical_line_integral",
            tail,
            tolerance: spec.tolerance,
        });
    }
    Ok(sum.value() / (2.0 * PI))
}

/// Region of the (t₁, t₂) plane, μ = (it₁, it₂, −i(t₁+t₂)).
#[derive(Debug, Clone, PartialEq)]
pub enum PlaneDomain {
    /// |t₁|, |t₂| ≤ half_width.
    Square { half_width: f64 },
    /// Union of squares |t₁ − a|, |t₂ − b| ≤ half_width.
    Boxes { centers: Vec<(f64, f64)>, half_width: f64 },
}

impl PlaneDomain {
    /// Lattice points of step `step` anchored at the origin, in lexicographic
    /// (t₁, t₂) order without repetitions.
    pub fn lattice(&self, step: f64) -> Vec<(i64, i64)> {
        let range = |c: f64, r: f64| ((c - r) / step).ceil() as i64..=((c + r) / step).floor() as i64;
        let mut pts = Vec::new();
        match self {
            PlaneDomain::Square { half_width } => {
                for i in range(0.0, *half_width) {
                    for j in range(0.0, *half_width) {
                        pts.push((i, j));
                    }
                }
            }
            PlaneDomain::Boxes {
                centers,
                half_width,
            } => {
                for &(a, b) in centers {
                    for i in range(a, *half_width) {
                        for j in range(b, *half_width) {
                            pts.push((i, j));
                        }
                    }
                }
                pts.sort_unstable();
                pts.dedup();
            }
        }
        pts
    }
}

/// ∬ f(μ) dμ₁dμ₂ over Re μ = 0 with dμ₁dμ₂ = −dt₁dt₂, by the product
/// trapezoid rule on `domain`. The domain replaces `spec.height` when given.
pub fn spectral_plane_integral<F>(
    f: F,
    domain: Option<&PlaneDomain>,
    spec: &QuadratureSpec,
) -> Result<ComplexValue>
where
    F: Fn(&LanglandsParameter) -> Result<ComplexValue> + Sync + Send,
{
    spec.validate()?;
    let square = PlaneDomain::Square {
        half_width: spec.height,
    };
    let domain = domain.unwrap_or(&square);
    let pts = domain.lattice(spec.step);
    let h = spec.step;
    let vals = par::try_map_range(pts.len(), |n| {
        let (i, j) = pts[n];
        let mu = LanglandsParameter::from_imaginary(i as f64 * h, j as f64 * h);
        let v = f(&mu)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow("spectral_plane_integral integrand"))
        }
    })?;
    let sum: CompensatedSum = vals.into_iter().collect();
    Ok(-sum.value() * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    #[test]
    fn zero_integrand() {
        let q = QuadratureSpec::default();
        assert_eq!(vertical_line_integral(|_| Ok(c(0.0, 0.0)), 1.0, &q).unwrap(), c(0.0, 0.0));
        assert_eq!(
            spectral_plane_integral(|_| Ok(c(0.0, 0.0)), None, &q.with_height(2.0)).unwrap(),
            c(0.0, 0.0)
        );
    }

    // (1/2πi)∫_(3) e^{s²} y^{−s} ds = e^{−(ln y)²/4}/(2√π)
    #[test]
    fn gaussian_inverse_mellin() {
        for scheme in [Scheme::Trapezoid, Scheme::DoubleExponential] {
            let step = if scheme == Scheme::Trapezoid { 0.05 } else { 0.025 };
            let q = QuadratureSpec {
                scheme,
                step,
                ..Default::default()
            };
            for &y in &[1.0, 0.2, 7.0] {
                let f = |s: ComplexValue| Ok((s * s - s * f64::ln(y)).exp());
                let got = vertical_line_integral(f, 3.0, &q).unwrap();
                let want = (-(f64::ln(y)).powi(2) / 4.0).exp() / (2.0 * PI.sqrt());
                // the integrand peaks near e⁹y^{−3}, so cancellation costs digits
                let scale = (9.0f64).exp() * y.powi(-3);
                assert!((got - want).norm() < 1e-15 * scale.max(1e3), "{scheme:?} y={y}: {got}");
                let finer = vertical_line_integral(f, 3.0, &q.refined()).unwrap();
                assert!((got - finer).norm() < q.tolerance);
            }
        }
    }

    #[test]
    fn odd_imaginary_part_gives_real_result() {
        let q = QuadratureSpec::default();
        let f = |s: ComplexValue| Ok(c(0.0, (s.im).sin()) * (-(s.im * s.im)).exp() + (-(s.im * s.im)).exp());
        let v = vertical_line_integral(f, 0.0, &q).unwrap();
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn slow_decay_is_reported() {
        let q = QuadratureSpec::default();
        let f = |s: ComplexValue| Ok(c(1.0, 0.0) / (s * s + 1.0));
        assert!(matches!(
            vertical_line_integral(f, 0.5, &q),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn plane_integral_factorizes() {
        let q = QuadratureSpec::default().with_step(0.1).with_height(12.0);
        let g = |t: f64| (-(t - 0.3) * (t - 0.3)).exp();
        let plane = spectral_plane_integral(|mu| Ok(c(g(mu.mu[0].im) * g(mu.mu[1].im), 0.0)), None, &q)
            .unwrap();
        let line = PI.sqrt();
        assert!((plane + line * line).norm() < 1e-12, "{plane}");
    }

    #[test]
    fn box_union_has_no_duplicates() {
        let d = PlaneDomain::Boxes {
            centers: vec![(0.0, 0.0), (0.5, 0.0)],
            half_width: 1.0,
        };
        let pts = d.lattice(0.5);
        assert_eq!(pts.len(), 5 * 6);
    }
}
