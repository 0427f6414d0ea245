//! Kernels of the w₄ and long Weyl elements in the GL(3) Kuznetsov formula,
//! and their averages Φ against the localized test function.
//!
//! Single-parameter kernels integrate along explicit contours. The averages
//! swap the order: the μ-sum runs inside, over lattice tables of Γ values, so
//! one pass along the s-contour serves every lattice point and every y.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use crate::numerics::{c, ln_gamma, ln_sin_pi, CompensatedSum, ComplexValue, QuadratureSpec, I};
use crate::spectral::{spec_measure, test_function, LanglandsParameter, SpectralGrid, TestFunctionSpec};
use crate::{par, Error, Result};

/// Default abscissa of the w₄ contour.
pub const W4_SIGMA: f64 = 0.25;
/// Leftmost lines (Re s₁, Re s₂) for the (+,+) kernel, which has no
/// trigonometric poles; larger arguments move the lines right to the saddle.
pub const WL_PLUS_LINES: (f64, f64) = (1.5, 1.5);
/// Lines for the other sign patterns; Re(s₁+s₂) = 1/2 sits between zeros of sin π(s₁+s₂).
pub const WL_MIXED_LINES: (f64, f64) = (0.25, 0.25);

/// Admissible range of |y|.
pub const Y_RANGE: (f64, f64) = (1e-6, 1e12);

const LN_PI: f64 = 1.144_729_885_849_400_2;
// ln(12288 π^{7/2})
const LN_W4_CONSTANT: f64 = 13.422_933_055_860_354;
// lattice points below this fraction of the largest |h·spec| are dropped
const WINDOW_CUTOFF: f64 = 1e-16;
// the w₄ contour leaves the vertical with this slope once past every pole row
const BEND_SLOPE: f64 = 0.5;
const BEND_ROUNDING: f64 = 2.0;
// a contour node is negligible below this fraction of the largest one
const QUIET: f64 = 1e-17;
const QUIET_RUN: usize = 64;
const MAX_LINE_NODES: usize = 4_000_000;
// the w_l box extends this far past the largest |Im μ_j|
const WL_MARGIN: f64 = 40.0;
// boundary terms of the w_l box must be below this fraction of the largest term
/// |Σ terms|/Σ|terms| below this leaves no correct digits in a w_l sum.
const WL_CANCELLATION: f64 = 1e-12;
const WL_EDGE: f64 = 1e-14;

fn check_y(y: f64) -> Result<()> {
    let a = y.abs();
    if !(a >= Y_RANGE.0 && a <= Y_RANGE.1) {
        return Err(Error::InvalidInput(format!("|y| = {a} outside [1e-6, 1e12]")));
    }
    Ok(())
}

/// Argument pair of the long-element kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub y1: f64,
    pub y2: f64,
}

impl KernelPoint {
    pub fn new(y1: f64, y2: f64) -> Result<Self> {
        check_y(y1)?;
        check_y(y2)?;
        Ok(Self { y1, y2 })
    }

    /// Point on the diagonal y₁ = y₂ = 𝒴².
    pub fn diagonal(scale: f64) -> Result<Self> {
        Self::new(scale * scale, scale * scale)
    }

    pub fn signs(&self) -> SignPattern {
        SignPattern::of(self.y1, self.y2)
    }

    /// Lines used when none are given. For (+,+) these pass through the real
    /// saddle of |X₁^{−s₁}X₂^{−s₂}G|, X_i = 4π²|y_i|, where Stirling gives
    /// s_i = (X_i·p)^{1/3} with p = (X₁^{1/3} + X₂^{1/3})^{3/2}; off the saddle
    /// the exponentially small kernel would be lost to cancellation.
    pub fn default_lines(&self) -> (f64, f64) {
        match self.signs() {
            SignPattern::PlusPlus => {
                let x1 = 4.0 * PI * PI * self.y1;
                let x2 = 4.0 * PI * PI * self.y2;
                let p = (x1.cbrt() + x2.cbrt()).powf(1.5);
                (
                    WL_PLUS_LINES.0.max((x1 * p).cbrt()),
                    WL_PLUS_LINES.1.max((x2 * p).cbrt()),
                )
            }
            _ => WL_MIXED_LINES,
        }
    }

    /// 𝒴 = min(|y₁|^{1/3}|y₂|^{1/6}, |y₁|^{1/6}|y₂|^{1/3}).
    pub fn scale(&self) -> f64 {
        let (a, b) = (self.y1.abs(), self.y2.abs());
        (a.cbrt() * b.powf(1.0 / 6.0)).min(a.powf(1.0 / 6.0) * b.cbrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignPattern {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl SignPattern {
    pub fn of(y1: f64, y2: f64) -> Self {
        match (y1 > 0.0, y2 > 0.0) {
            (true, true) => Self::PlusPlus,
            (true, false) => Self::PlusMinus,
            (false, true) => Self::MinusPlus,
            (false, false) => Self::MinusMinus,
        }
    }


    // j with a factor sin π(s₁ − μ_j)
    fn row_sines(self) -> &'static [usize] {
        match self {
            Self::PlusPlus => &[],
            Self::PlusMinus => &[0],
            Self::MinusPlus => &[0, 1],
            Self::MinusMinus => &[1],
        }
    }

    // j with a factor sin π(s₂ + μ_j)
    fn col_sines(self) -> &'static [usize] {
        match self {
            Self::PlusPlus => &[],
            Self::PlusMinus => &[1, 2],
            Self::MinusPlus => &[2],
            Self::MinusMinus => &[1],
        }
    }

    // divided by sin π(s₁+s₂)
    fn has_sum_sine(self) -> bool {
        matches!(self, Self::PlusMinus | Self::MinusPlus)
    }

    /// The s-independent part of S^{ε₁ε₂}(s₁, s₂; μ).
    pub fn trig_constant(self, mu: &LanglandsParameter) -> Result<ComplexValue> {
        let (cs, sn) = trig_values(mu);
        let k = 32.0 * PI * PI;
        let (num, den) = match self {
            Self::PlusPlus => (cs[0] * cs[1] * cs[2], c(24.0 * PI * PI, 0.0)),
            Self::PlusMinus => (-cs[1], k * sn[0] * sn[2]),
            Self::MinusPlus => (-cs[0], k * sn[1] * sn[2]),
            Self::MinusMinus => (cs[2], k * sn[1] * sn[0]),
        };
        if den.norm() < 1e-300 {
            return Err(Error::pole("trig_constant", mu.nu()[0]));
        }
        Ok(num / den)
    }

    /// spec(μ)·trig_constant(μ), written so that the zeros of sin(3πν_j/2)
    /// cancel against spec and the product stays finite on Re μ = 0.
    pub fn spec_times_trig_constant(self, mu: &LanglandsParameter) -> ComplexValue {
        let nu = mu.nu();
        let (cs, sn) = trig_values(mu);
        let p = 27.0 * nu[0] * nu[1] * nu[2];
        let k = 32.0 * PI * PI;
        match self {
            Self::PlusPlus => p * sn[0] * sn[1] * sn[2] / (24.0 * PI * PI),
            Self::PlusMinus => -p * sn[1] / (k * cs[0] * cs[2]),
            Self::MinusPlus => -p * sn[0] / (k * cs[1] * cs[2]),
            Self::MinusMinus => p * sn[2] / (k * cs[1] * cs[0]),
        }
    }
}

// cos(3πν_j/2), sin(3πν_j/2)
fn trig_values(mu: &LanglandsParameter) -> ([ComplexValue; 3], [ComplexValue; 3]) {
    let nu = mu.nu();
    let arg = nu.map(|v| v * (1.5 * PI));
    (arg.map(|z| z.cos()), arg.map(|z| z.sin()))
}

/// S^{ε₁ε₂}(s₁, s₂; μ).
pub fn trig_factor(pattern: SignPattern, s1: ComplexValue, s2: ComplexValue, mu: &LanglandsParameter) -> Result<ComplexValue> {
    let mut log = c(0.0, 0.0);
    for &j in pattern.row_sines() {
        log += ln_sin_pi(s1 - mu.mu[j]);
    }
    for &j in pattern.col_sines() {
        log += ln_sin_pi(s2 + mu.mu[j]);
    }
    if pattern.has_sum_sine() {
        log -= sum_sine(s1 + s2)?;
    }
    Ok(pattern.trig_constant(mu)? * log.exp())
}

fn sum_sine(z: ComplexValue) -> Result<ComplexValue> {
    if z.im.abs() < 1e-12 && (z.re - z.re.round()).abs() < 1e-12 {
        return Err(Error::pole("sin π(s₁+s₂)", z));
    }
    Ok(ln_sin_pi(z))
}

/// G(s₁, s₂; μ) = Π_j Γ(s₁ − μ_j)Γ(s₂ + μ_j) / Γ(s₁ + s₂).
pub fn g_product(s1: ComplexValue, s2: ComplexValue, mu: &LanglandsParameter) -> Result<ComplexValue> {
    let mut log = -ln_gamma(s1 + s2)?;
    for m in mu.mu {
        log += ln_gamma(s1 - m)? + ln_gamma(s2 + m)?;
    }
    Ok(log.exp())
}

/// |4π²y₁|^{−s₁}|4π²y₂|^{−s₂}·G·S^{sgn y₁, sgn y₂}, the long-element integrand.
pub fn wl_integrand(p: &KernelPoint, s1: ComplexValue, s2: ComplexValue, mu: &LanglandsParameter) -> Result<ComplexValue> {
    let x1 = (4.0 * PI * PI * p.y1.abs()).ln();
    let x2 = (4.0 * PI * PI * p.y2.abs()).ln();
    Ok((-s1 * x1 - s2 * x2).exp() * g_product(s1, s2, mu)? * trig_factor(p.signs(), s1, s2, mu)?)
}

// Σ_j log Γ((s−μ_j)/2) − log Γ((1−s+μ_j)/2) and the shifted companion product
fn w4_log_products(s: ComplexValue, mu: &LanglandsParameter) -> Result<(ComplexValue, ComplexValue)> {
    let mut p1 = c(0.0, 0.0);
    let mut p2 = c(0.0, 0.0);
    for m in mu.mu {
        let (a, b) = w4_log_ratios(s - m)?;
        p1 += a;
        p2 += b;
    }
    Ok((p1, p2))
}

// both log-ratios at z = s − μ_j
fn w4_log_ratios(z: ComplexValue) -> Result<(ComplexValue, ComplexValue)> {
    let one = c(1.0, 0.0);
    let a = ln_gamma(z * 0.5)? - ln_gamma((one - z) * 0.5)?;
    let b = ln_gamma((one + z) * 0.5)? - ln_gamma((2.0 - z) * 0.5)?;
    Ok((a, b))
}

/// (G̃⁺, G̃⁻)(s, μ): π^{−3s}/(12288π^{7/2})·(P₁ ± iP₂) with P₁, P₂ the two
/// products of gamma ratios.
pub fn g_tilde(s: ComplexValue, mu: &LanglandsParameter) -> Result<(ComplexValue, ComplexValue)> {
    let (p1, p2) = w4_log_products(s, mu)?;
    let base = -3.0 * s * LN_PI - LN_W4_CONSTANT;
    let a = (base + p1).exp();
    let b = I * (base + p2).exp();
    Ok((a + b, a - b))
}

/// s(u) = σ + iu − δ·b(u): vertical while |u| is below the pole rows, then
/// leaning left with slope δ so that the gamma ratios decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BentContour {
    pub sigma: f64,
    pub slope: f64,
    /// |u| past which the contour leans left.
    pub bend: f64,
}

impl BentContour {
    /// Contour for parameters with |Im μ_j| ≤ tmax and arguments up to |y|.
    pub fn for_kernel(sigma: f64, tmax: f64, y_max: f64) -> Self {
        // past 2π·|y|^{1/3} the factor |π³y|^{−s} loses to the gamma ratios
        let bend = (tmax + 8.0).max(2.0 * PI * E * y_max.cbrt());
        Self {
            sigma,
            slope: BEND_SLOPE,
            bend,
        }
    }

    /// (s(u), s′(u)).
    pub fn at(&self, u: f64) -> (ComplexValue, ComplexValue) {
        let (a, b) = (BEND_ROUNDING, self.bend);
        let r1 = ((u - b).powi(2) + a * a).sqrt();
        let r2 = ((u + b).powi(2) + a * a).sqrt();
        let lean = 0.5 * (r1 + r2) - (b * b + a * a).sqrt();
        let dlean = 0.5 * ((u - b) / r1 + (u + b) / r2);
        (c(self.sigma - self.slope * lean, u), c(-self.slope * dlean, 1.0))
    }

    // every pole s = μ_j − m of the w₄ integrand must stay left of the contour
    fn check_poles(&self, mu: &LanglandsParameter) -> Result<()> {
        for m in mu.mu {
            let (s, _) = self.at(m.im);
            if s.re <= m.re + 0.02 {
                return Err(Error::pole("w4 contour", m));
            }
        }
        Ok(())
    }
}

/// (1/2πi)∫ F ds along `line` for several integrands at once. `eval` maps a
/// batch of (s, s′(u)) to one row of outputs per node, each already multiplied
/// by s′(u). Nodes u = k·step are walked outward from 0 until every output has
/// been negligible for a run of nodes past the bend.
fn contour_sum<F>(line: &BentContour, step: f64, outputs: usize, eval: F) -> Result<Vec<ComplexValue>>
where
    F: Fn(&[(ComplexValue, ComplexValue)]) -> Result<Vec<Vec<ComplexValue>>>,
{
    const BLOCK: i64 = 64;
    let mut sums = vec![CompensatedSum::new(); outputs];
    let mut peaks = vec![0.0f64; outputs];
    let mut quiet = vec![0usize; outputs];
    let mut k = 0i64;
    loop {
        let mut pts = Vec::with_capacity(2 * BLOCK as usize);
        for kk in k..k + BLOCK {
            let u = kk as f64 * step;
            pts.push(line.at(u));
            if kk > 0 {
                pts.push(line.at(-u));
            }
        }
        let rows = eval(&pts)?;
        let mut idx = 0;
        for kk in k..k + BLOCK {
            let width = if kk > 0 { 2 } else { 1 };
            let mut size = vec![0.0f64; outputs];
            for row in &rows[idx..idx + width] {
                for (j, v) in row.iter().enumerate() {
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::Overflow("w4 contour integrand"));
                    }
                    sums[j].add(*v);
                    size[j] = size[j].max(v.norm());
                }
            }
            idx += width;
            let past = kk as f64 * step > line.bend;
            for j in 0..outputs {
                peaks[j] = peaks[j].max(size[j]);
                if past && size[j] <= QUIET * peaks[j] {
                    quiet[j] += 1;
                } else {
                    quiet[j] = 0;
                }
            }
        }
        k += BLOCK;
        if quiet.iter().all(|&q| q >= QUIET_RUN) {
            break;
        }
        if 2 * k as usize > MAX_LINE_NODES {
            return Err(Error::Budget {
                what: "w4 contour nodes",
                needed: 2 * k as u64,
                limit: MAX_LINE_NODES as u64,
            });
        }
    }
    let scale = step / (2.0 * PI) * -I;
    Ok(sums.iter().map(|s| s.value() * scale).collect())
}

fn max_imaginary(mu: &LanglandsParameter) -> f64 {
    mu.mu.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

// trapezoid step in u: a quarter of the distance to the nearest pole, at most q.step
fn line_step(pole_distance: f64, q: &QuadratureSpec) -> f64 {
    q.step.min(pole_distance / 4.0)
}

/// K_{w₄}(y; μ) on the default contour.
pub fn kernel_w4(y: f64, mu: &LanglandsParameter, q: &QuadratureSpec) -> Result<ComplexValue> {
    kernel_w4_on(y, mu, W4_SIGMA, q)
}

/// K_{w₄}(y; μ) = (1/2πi)∫ |y|^{−s} G̃^{sgn y}(s, μ) ds on the bent contour
/// through σ.
pub fn kernel_w4_on(y: f64, mu: &LanglandsParameter, sigma: f64, q: &QuadratureSpec) -> Result<ComplexValue> {
    check_y(y)?;
    q.validate()?;
    let line = BentContour::for_kernel(sigma, max_imaginary(mu), y.abs());
    line.check_poles(mu)?;
    let max_re = mu.mu.iter().map(|z| z.re).fold(f64::MIN, f64::max);
    let step = line_step(sigma - max_re, q);
    let ly = y.abs().ln();
    let plus = y > 0.0;
    let out = contour_sum(&line, step, 1, |pts| {
        par::try_map_range(pts.len(), |n| {
            let (s, ds) = pts[n];
            let (p1, p2) = w4_log_products(s, mu)?;
            let base = -s * (ly + 3.0 * LN_PI) - LN_W4_CONSTANT;
            let a = (base + p1).exp();
            let b = I * (base + p2).exp();
            Ok(vec![(if plus { a + b } else { a - b }) * ds])
        })
    })?;
    Ok(out[0])
}

/// K^{sgn y₁, sgn y₂}_{w_l}(y₁, y₂; μ) on the default lines of its sign pattern.
pub fn kernel_wl(y1: f64, y2: f64, mu: &LanglandsParameter, q: &QuadratureSpec) -> Result<ComplexValue> {
    let p = KernelPoint::new(y1, y2)?;
    kernel_wl_on(&p, mu, p.default_lines(), q)
}

/// The long-element kernel as a double trapezoid sum over the vertical lines
/// Re s₁ = lines.0, Re s₂ = lines.1, truncated to a square around the real axis.
/// Fails with non-convergence when the integrand on the edge of the square is
/// not negligible, which is the case for the mixed sign patterns: there G·S
/// decays only polynomially along Im s₁ = −Im s₂.
pub fn kernel_wl_on(p: &KernelPoint, mu: &LanglandsParameter, lines: (f64, f64), q: &QuadratureSpec) -> Result<ComplexValue> {
    q.validate()?;
    let pattern = p.signs();
    let grid = WlGrid::new(pattern, lines, &[*mu], max_imaginary(mu), q)?;
    let row = grid.row_logs(mu)?;
    let col = grid.col_logs(mu)?;
    let weight = pattern.trig_constant(mu)?;
    // one lattice point: rows and cols share a common scale to stay in range
    let (rs, cs) = (max_re(&row), max_re(&col));
    let a: Vec<ComplexValue> = row.iter().map(|z| (z - rs).exp()).collect();
    let b: Vec<ComplexValue> = col.iter().map(|z| (z - cs).exp()).collect();
    let mut m = vec![c(0.0, 0.0); a.len() * b.len()];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            m[i * b.len() + j] = weight * ai * bj;
        }
    }
    let v = grid.finish(&m, rs + cs, std::slice::from_ref(p))?;
    Ok(v[0])
}

fn max_re(v: &[ComplexValue]) -> f64 {
    v.iter().map(|z| z.re).fold(f64::MIN, f64::max)
}

/// Trapezoid grid for the long-element double integral.
struct WlGrid {
    pattern: SignPattern,
    s1: Vec<ComplexValue>,
    s2: Vec<ComplexValue>,
    step: f64,
    /// log of the s₁+s₂ factor, indexed by i + j
    diag: Vec<ComplexValue>,
}

impl WlGrid {
    fn new(pattern: SignPattern, lines: (f64, f64), mus: &[LanglandsParameter], tmax: f64, q: &QuadratureSpec) -> Result<Self> {
        let (sig1, sig2) = lines;
        let right1 = mus.iter().flat_map(|m| m.mu).map(|z| z.re).fold(f64::MIN, f64::max);
        let right2 = mus.iter().flat_map(|m| m.mu).map(|z| -z.re).fold(f64::MIN, f64::max);
        let mut dist = (sig1 - right1).min(sig2 - right2);
        if pattern.has_sum_sine() {
            let t = sig1 + sig2;
            let gap = (t - t.floor()).min(t.ceil() - t);
            if t <= 0.0 || t >= 1.0 || gap < 1e-3 {
                return Err(Error::pole("sin π(s₁+s₂) line", c(t, 0.0)));
            }
            dist = dist.min(gap);
        }
        if dist <= 0.0 {
            return Err(Error::pole("w_l lines", c(sig1, sig2)));
        }
        q.validate()?;
        // far right the integrand is a Gaussian of width about √σ in Im s
        let (lo, hi) = (sig1.min(sig2), sig1.max(sig2));
        let step = dist.min(lo.sqrt()) / 4.0;
        let half = ((tmax + WL_MARGIN.max(8.0 * hi.sqrt())) / step).ceil() as i64;
        let us: Vec<f64> = (-half..=half).map(|k| k as f64 * step).collect();
        let s1: Vec<ComplexValue> = us.iter().map(|&u| c(sig1, u)).collect();
        let s2: Vec<ComplexValue> = us.iter().map(|&u| c(sig2, u)).collect();
        let mut diag = Vec::with_capacity(2 * us.len() - 1);
        for n in 0..2 * us.len() - 1 {
            let z = c(sig1 + sig2, (n as i64 - 2 * half) as f64 * step);
            let mut l = -ln_gamma(z)?;
            if pattern.has_sum_sine() {
                l -= sum_sine(z)?;
            }
            diag.push(l);
        }
        Ok(Self {
            pattern,
            s1,
            s2,
            step,
            diag,
        })
    }

    fn row_logs(&self, mu: &LanglandsParameter) -> Result<Vec<ComplexValue>> {
        self.s1
            .iter()
            .map(|&s| {
                let mut l = c(0.0, 0.0);
                for m in mu.mu {
                    l += ln_gamma(s - m)?;
                }
                for &j in self.pattern.row_sines() {
                    l += ln_sin_pi(s - mu.mu[j]);
                }
                Ok(l)
            })
            .collect()
    }

    fn col_logs(&self, mu: &LanglandsParameter) -> Result<Vec<ComplexValue>> {
        self.s2
            .iter()
            .map(|&s| {
                let mut l = c(0.0, 0.0);
                for m in mu.mu {
                    l += ln_gamma(s + m)?;
                }
                for &j in self.pattern.col_sines() {
                    l += ln_sin_pi(s + mu.mu[j]);
                }
                Ok(l)
            })
            .collect()
    }

    /// Σ_{i,j} |4π²y₁|^{−s₁}|4π²y₂|^{−s₂}·e^{diag(i+j) + shift}·m[i,j]·step²/(2π)²
    /// for each point, with the edge check.
    fn finish(&self, m: &[ComplexValue], shift: f64, points: &[KernelPoint]) -> Result<Vec<ComplexValue>> {
        let (n1, n2) = (self.s1.len(), self.s2.len());
        let mut out = Vec::with_capacity(points.len());
        for p in points {
            if p.signs() != self.pattern {
                return Err(Error::InvalidInput("sign pattern differs within a batch".into()));
            }
            let l1 = (4.0 * PI * PI * p.y1.abs()).ln();
            let l2 = (4.0 * PI * PI * p.y2.abs()).ln();
            let e1: Vec<ComplexValue> = self.s1.iter().map(|s| -s * l1).collect();
            let e2: Vec<ComplexValue> = self.s2.iter().map(|s| -s * l2).collect();
            // exponents stay in logs until one common scale is taken out
            let scale = (0..n1)
                .flat_map(|i| (0..n2).map(move |j| (i, j)))
                .map(|(i, j)| (e1[i] + e2[j] + self.diag[i + j]).re)
                .fold(f64::MIN, f64::max);
            let rows = par::map_range(n1, |i| {
                let mut sum = CompensatedSum::new();
                let (mut peak, mut edge, mut mass) = (0.0f64, 0.0f64, 0.0f64);
                for j in 0..n2 {
                    let t = (e1[i] + e2[j] + self.diag[i + j] - scale).exp() * m[i * n2 + j];
                    let a = t.norm();
                    peak = peak.max(a);
                    mass += a;
                    if i == 0 || i + 1 == n1 || j == 0 || j + 1 == n2 {
                        edge = edge.max(a);
                    }
                    sum.add(t);
                }
                (sum.value(), peak, edge, mass)
            });
            let mut total = CompensatedSum::new();
            let (mut peak, mut edge, mut mass) = (0.0f64, 0.0f64, 0.0f64);
            for (v, pk, ed, ms) in rows {
                total.add(v);
                peak = peak.max(pk);
                edge = edge.max(ed);
                mass += ms;
            }
            let kept = total.value().norm() / mass;
            if kept < WL_CANCELLATION {
                return Err(Error::NonConvergence {
                    what: "w_l kernel sum (cancels below rounding)",
                    tail: kept,
                    tolerance: WL_CANCELLATION,
                });
            }
            let value = total.value() * (scale + shift).exp() * (self.step * self.step / (4.0 * PI * PI));
            if !(value.re.is_finite() && value.im.is_finite()) {
                return Err(Error::Overflow("w_l kernel sum"));
            }
            if edge > WL_EDGE * peak {
                return Err(Error::NonConvergence {
                    what: "w_l kernel box",
                    tail: edge / peak,
                    tolerance: WL_EDGE,
                });
            }
            out.push(value);
        }
        Ok(out)
    }
}

/// A lattice point of the spectral window with μ = i·step·k.
#[derive(Debug, Clone, Copy)]
struct WindowPoint {
    k: [i64; 3],
    mu: LanglandsParameter,
    /// −h(μ)·step², the orientation-corrected area element without spec.
    weight: f64,
}

/// The spectral window of a test function on a lattice, used to average
/// kernels: Φ = ∬ h·K·spec dμ ≈ Σ weight·spec·K.
#[derive(Debug, Clone)]
pub struct KernelAverager {
    step: f64,
    points: Vec<WindowPoint>,
    tmax: f64,
    q: QuadratureSpec,
}

impl KernelAverager {
    /// Lattice of step q.step over the window of `spec`.
    pub fn new(spec: &TestFunctionSpec, q: &QuadratureSpec) -> Result<Self> {
        q.validate()?;
        let grid = SpectralGrid::build(spec, q.step, WINDOW_CUTOFF)?;
        let points: Vec<WindowPoint> = grid
            .nodes
            .iter()
            .map(|n| {
                let (i, j) = n.index;
                WindowPoint {
                    k: [i, j, -i - j],
                    mu: n.mu,
                    weight: -test_function(&n.mu, spec).re * q.step * q.step,
                }
            })
            .collect();
        let tmax = points.iter().map(|p| max_imaginary(&p.mu)).fold(0.0, f64::max);
        Ok(Self {
            step: q.step,
            points,
            tmax,
            q: *q,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest |Im μ_j| over the lattice.
    pub fn reach(&self) -> f64 {
        self.tmax
    }

    /// Σ weight·f(μ) over the lattice, in lattice order.
    pub fn average<F>(&self, f: F) -> Result<ComplexValue>
    where
        F: Fn(&LanglandsParameter) -> Result<ComplexValue> + Sync + Send,
    {
        let vals = par::try_map_range(self.points.len(), |n| {
            let p = &self.points[n];
            Ok(f(&p.mu)? * p.weight)
        })?;
        Ok(vals.into_iter().collect::<CompensatedSum>().value())
    }

    // points merged by Weyl orbit, for integrands symmetric under permutations of μ;
    // the weights are multiplied by `factor(μ)`
    fn orbits<F>(&self, negate: bool, factor: F) -> Result<Vec<([i64; 3], ComplexValue)>>
    where
        F: Fn(&LanglandsParameter) -> Result<ComplexValue>,
    {
        let mut merged: BTreeMap<[i64; 3], ComplexValue> = BTreeMap::new();
        for p in &self.points {
            let mut k = if negate { p.k.map(|x| -x) } else { p.k };
            k.sort_unstable();
            *merged.entry(k).or_insert(c(0.0, 0.0)) += factor(&p.mu)? * p.weight;
        }
        Ok(merged.into_iter().filter(|(_, w)| w.norm() > 0.0).collect())
    }

    fn k_range(&self) -> i64 {
        self.points.iter().flat_map(|p| p.k).map(|x| x.abs()).max().unwrap_or(0)
    }

    /// Φ_{w₄}(y) = ∬ h·K_{w₄}(y; μ)·spec dμ for each y.
    pub fn w4(&self, ys: &[f64]) -> Result<Vec<ComplexValue>> {
        self.w4_on(ys, W4_SIGMA, false)
    }

    /// Φ_{w₅}(y) = ∬ h·K_{w₄}(−y; −μ)·spec dμ for each y.
    pub fn w5(&self, ys: &[f64]) -> Result<Vec<ComplexValue>> {
        self.w4_on(ys, W4_SIGMA, true)
    }

    /// Φ_{w₄} on the contour through σ; with `negate` the kernel is taken at (−y, −μ).
    pub fn w4_on(&self, ys: &[f64], sigma: f64, negate: bool) -> Result<Vec<ComplexValue>> {
        for &y in ys {
            check_y(y)?;
        }
        if ys.is_empty() || self.points.is_empty() {
            return Ok(vec![c(0.0, 0.0); ys.len()]);
        }
        let orbits = self.orbits(negate, spec_measure)?;
        let kr = self.k_range();
        let y_max = ys.iter().map(|y| y.abs()).fold(0.0, f64::max);
        let line = BentContour::for_kernel(sigma, self.tmax, y_max);
        for p in &self.points {
            line.check_poles(&p.mu)?;
        }
        let step = line_step(sigma, &self.q);
        let h = self.step;
        let logs: Vec<(f64, bool)> = ys
            .iter()
            .map(|&y| (y.abs().ln(), (y > 0.0) != negate))
            .collect();
        contour_sum(&line, step, ys.len(), |pts| {
            par::try_map_range(pts.len(), |n| {
                let (s, ds) = pts[n];
                // ratio tables over the lattice values μ_j = i·h·k
                let mut t1 = Vec::with_capacity((2 * kr + 1) as usize);
                let mut t2 = Vec::with_capacity((2 * kr + 1) as usize);
                for k in -kr..=kr {
                    let (a, b) = w4_log_ratios(s - c(0.0, k as f64 * h))?;
                    t1.push(a);
                    t2.push(b);
                }
                let (g1, g2) = (max_re(&t1), max_re(&t2));
                let r1: Vec<ComplexValue> = t1.iter().map(|z| (z - g1).exp()).collect();
                let r2: Vec<ComplexValue> = t2.iter().map(|z| (z - g2).exp()).collect();
                let at = |k: i64| (k + kr) as usize;
                let mut h1 = CompensatedSum::new();
                let mut h2 = CompensatedSum::new();
                for (k, w) in &orbits {
                    h1.add(*w * r1[at(k[0])] * r1[at(k[1])] * r1[at(k[2])]);
                    h2.add(*w * r2[at(k[0])] * r2[at(k[1])] * r2[at(k[2])]);
                }
                let (h1, h2) = (h1.value(), h2.value());
                Ok(logs
                    .iter()
                    .map(|&(ly, plus)| {
                        let base = -s * (ly + 3.0 * LN_PI) - LN_W4_CONSTANT;
                        let a = (base + 3.0 * g1).exp() * h1;
                        let b = I * (base + 3.0 * g2).exp() * h2;
                        (if plus { a + b } else { a - b }) * ds
                    })
                    .collect())
            })
        })
    }

    /// Φ_{w_l}(y₁, y₂) for each point, on its default lines.
    pub fn wl(&self, points: &[KernelPoint]) -> Result<Vec<ComplexValue>> {
        let mut out = Vec::with_capacity(points.len());
        for p in points {
            out.push(self.wl_on(std::slice::from_ref(p), p.default_lines())?[0]);
        }
        Ok(out)
    }

    /// Φ_{w_l} on given lines; all points must share a sign pattern.
    pub fn wl_on(&self, points: &[KernelPoint], lines: (f64, f64)) -> Result<Vec<ComplexValue>> {
        let Some(first) = points.first() else {
            return Ok(Vec::new());
        };
        let pattern = first.signs();
        if self.points.is_empty() {
            return Ok(vec![c(0.0, 0.0); points.len()]);
        }
        let mus: Vec<LanglandsParameter> = self.points.iter().map(|p| p.mu).collect();
        let grid = WlGrid::new(pattern, lines, &mus, self.tmax, &self.q)?;
        // the (+,+) integrand is symmetric under permutations of μ; the others are not
        let nodes: Vec<([i64; 3], ComplexValue)> = if pattern == SignPattern::PlusPlus {
            self.orbits(false, |mu| Ok(pattern.spec_times_trig_constant(mu)))?
        } else {
            self.points
                .iter()
                .map(|p| (p.k, pattern.spec_times_trig_constant(&p.mu) * p.weight))
                .collect()
        };
        let kr = self.k_range();
        let h = self.step;
        let lattice = |k: i64| c(0.0, k as f64 * h);
        // log Γ(s₁ − μ) and log sin π(s₁ − μ) for every lattice value, and the same for s₂ + μ
        let table = |s: &[ComplexValue], sign: f64| -> Result<Vec<Vec<(ComplexValue, ComplexValue)>>> {
            par::try_map_range(s.len(), |i| {
                (-kr..=kr)
                    .map(|k| {
                        let z = s[i] + sign * lattice(k);
                        Ok((ln_gamma(z)?, ln_sin_pi(z)))
                    })
                    .collect()
            })
        };
        let t1 = table(&grid.s1, -1.0)?;
        let t2 = table(&grid.s2, 1.0)?;
        let at = |k: i64| (k + kr) as usize;
        let rows_for = |t: &[Vec<(ComplexValue, ComplexValue)>], k: &[i64; 3], sines: &[usize]| -> Vec<ComplexValue> {
            t.iter()
                .map(|row| {
                    let mut l = row[at(k[0])].0 + row[at(k[1])].0 + row[at(k[2])].0;
                    for &j in sines {
                        l += row[at(k[j])].1;
                    }
                    l
                })
                .collect()
        };
        // common scales keep every exponential in range
        let mut r_shift = f64::MIN;
        let mut c_shift = f64::MIN;
        let mut logs = Vec::with_capacity(nodes.len());
        for (k, _) in &nodes {
            let r = rows_for(&t1, k, pattern.row_sines());
            let cl = rows_for(&t2, k, pattern.col_sines());
            r_shift = r_shift.max(max_re(&r));
            c_shift = c_shift.max(max_re(&cl));
            logs.push((r, cl));
        }
        let (n1, n2) = (grid.s1.len(), grid.s2.len());
        let a: Vec<Vec<ComplexValue>> = logs
            .iter()
            .zip(&nodes)
            .map(|((r, _), (_, w))| r.iter().map(|z| (z - r_shift).exp() * w).collect())
            .collect();
        let b: Vec<Vec<ComplexValue>> = logs
            .iter()
            .map(|(_, cl)| cl.iter().map(|z| (z - c_shift).exp()).collect())
            .collect();
        let m_rows = par::map_range(n1, |i| {
            let mut row = vec![c(0.0, 0.0); n2];
            for (an, bn) in a.iter().zip(&b) {
                let x = an[i];
                if x.norm() == 0.0 {
                    continue;
                }
                for (r, y) in row.iter_mut().zip(bn) {
                    *r += x * y;
                }
            }
            row
        });
        let m: Vec<ComplexValue> = m_rows.into_iter().flatten().collect();
        grid.finish(&m, r_shift + c_shift, points)
    }
}

/// Φ_{w₄}(y) for a single y.
pub fn phi_w4(y: f64, spec: &TestFunctionSpec, q: &QuadratureSpec) -> Result<ComplexValue> {
    Ok(KernelAverager::new(spec, q)?.w4(&[y])?[0])
}

/// Φ_{w₅}(y) for a single y.
pub fn phi_w5(y: f64, spec: &TestFunctionSpec, q: &QuadratureSpec) -> Result<ComplexValue> {
    Ok(KernelAverager::new(spec, q)?.w5(&[y])?[0])
}

/// Φ_{w_l}(y₁, y₂) for a single point.
pub fn phi_wl(y1: f64, y2: f64, spec: &TestFunctionSpec, q: &QuadratureSpec) -> Result<ComplexValue> {
    let p = KernelPoint::new(y1, y2)?;
    Ok(KernelAverager::new(spec, q)?.wl(&[p])?[0])
}

/// |Φ| on both sides of a truncation threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEcho {
    /// Argument scale below the threshold (|y| for w₄, 𝒴 for w_l).
    pub inner_scale: f64,
    pub outer_scale: f64,
    pub inner: f64,
    pub outer: f64,
}

impl DecayEcho {
    pub fn ratio(&self) -> f64 {
        self.inner / self.outer
    }

    /// Whether |Φ| inside is at most `factor` times |Φ| outside.
    pub fn decays_by(&self, factor: f64) -> bool {
        self.inner <= factor * self.outer
    }
}

/// |Φ_{w₄}| at y = T² against y = 10T³.
pub fn w4_decay_echo(avg: &KernelAverager, t: f64) -> Result<DecayEcho> {
    let (a, b) = (t * t, 10.0 * t.powi(3));
    let v = avg.w4(&[a, b])?;
    Ok(DecayEcho {
        inner_scale: a,
        outer_scale: b,
        inner: v[0].norm(),
        outer: v[1].norm(),
    })
}

/// |Φ_{w_l}| on the diagonal y₁ = y₂ at 𝒴 = T/4 against 𝒴 = 4T.
pub fn wl_decay_echo(avg: &KernelAverager, t: f64) -> Result<DecayEcho> {
    let (a, b) = (t / 4.0, 4.0 * t);
    let v = avg.wl(&[KernelPoint::diagonal(a)?, KernelPoint::diagonal(b)?])?;
    Ok(DecayEcho {
        inner_scale: a,
        outer_scale: b,
        inner: v[0].norm(),
        outer: v[1].norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_matches_definition() {
        let v = (12288.0 * PI.powf(3.5)).ln();
        assert!((v - LN_W4_CONSTANT).abs() < 1e-13, "{v}");
    }

    #[test]
    fn g_tilde_at_real_point() {
        let mu = LanglandsParameter::from_imaginary(0.0, 0.0);
        let (p, m) = g_tilde(c(0.5, 0.0), &mu).unwrap();
        // both gamma products equal 1 here
        let k = (-1.5 * LN_PI - LN_W4_CONSTANT).exp();
        assert!((p - c(k, k)).norm() < 1e-15 * k.max(1e-300) * 10.0);
        assert!((p - m - 2.0 * I * k).norm() < 1e-14 * k);
    }

    #[test]
    fn contour_passes_right_of_poles() {
        let line = BentContour::for_kernel(0.25, 20.0, 100.0);
        for u in [0.0, 5.0, 20.0, -20.0] {
            assert!(line.at(u).0.re > 0.18);
        }
        assert!(line.at(line.bend + 50.0).0.re < -20.0);
        let (s, ds) = line.at(3.0);
        let (s2, _) = line.at(3.0 + 1e-6);
        assert!(((s2 - s) / 1e-6 - ds).norm() < 1e-6);
    }

    #[test]
    fn spec_product_is_regular() {
        let mu = LanglandsParameter::from_imaginary(1.3, -0.4);
        for p in [SignPattern::PlusPlus, SignPattern::PlusMinus, SignPattern::MinusPlus, SignPattern::MinusMinus] {
            let direct = spec_measure(&mu).unwrap() * p.trig_constant(&mu).unwrap();
            assert!((direct - p.spec_times_trig_constant(&mu)).norm() < 1e-12 * direct.norm());
        }
        // ν₁ = 0: trig_constant has a pole, the product does not
        let flat = LanglandsParameter::from_imaginary(0.7, 0.7);
        assert!(SignPattern::PlusMinus.spec_times_trig_constant(&flat).norm().is_finite());
    }

    #[test]
    fn kernel_point_scale() {
        let p = KernelPoint::new(64.0, -1.0).unwrap();
        assert!((p.scale() - 2.0).abs() < 1e-14);
        assert_eq!(p.signs(), SignPattern::PlusMinus);
        assert!(KernelPoint::new(0.0, 1.0).is_err());
        assert!(KernelPoint::new(1e13, 1.0).is_err());
    }
}
