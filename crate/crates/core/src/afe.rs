//! Approximate functional equation for L(1/2, f⊗φ), f holomorphic of level
//! one and φ a GL(3) form given through its Hecke coefficients.
//!
//! The weights are contour integrals of y^{−s} times a ratio of six Γ_R
//! factors times e^{s²}/s. Each weight is evaluated by the trapezoid rule on a
//! vertical line whose abscissa depends on y: for y < 1 the line sits at
//! Re s = −2 and the residue at s = 0 is added back, which avoids the
//! cancellation that the Re s = 3 line suffers for tiny y.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use crate::gl2forms::HolomorphicForm;
use crate::numerics::{c, checked, ln_gamma, CompensatedSum, ComplexValue, QuadratureSpec};
use crate::spectral::LanglandsParameter;
use crate::{Error, Result};

/// Hecke coefficients A(m₁, m₂) of the GL(3) side.
pub struct CoefficientSource<'a> {
    eval: Box<dyn Fn(u64, u64) -> Result<ComplexValue> + Sync + 'a>,
    label: String,
}

impl fmt::Debug for CoefficientSource<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSource").field("label", &self.label).finish()
    }
}

impl<'a> CoefficientSource<'a> {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Result<Self>
    where
        F: Fn(u64, u64) -> Result<ComplexValue> + Sync + 'a,
    {
        let one = eval(1, 1)?;
        if (one - c(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidInput(format!("A(1,1) = {one}, expected 1")));
        }
        Ok(Self {
            eval: Box::new(eval),
            label: label.into(),
        })
    }

    pub fn minimal(e: &'a crate::eisenstein::MinimalEisenstein) -> Result<Self> {
        Self::new("minimal Eisenstein", move |m, n| crate::eisenstein::a_min(e, m, n))
    }

    pub fn maximal(e: &'a crate::eisenstein::MaximalEisenstein) -> Result<Self> {
        Self::new("maximal Eisenstein", move |m, n| crate::eisenstein::a_max(e, m, n))
    }

    /// A(m₁,m₂) = 1 at (1,1) and 0 elsewhere.
    pub fn delta() -> Self {
        Self::new("delta", |m, n| Ok(if m == 1 && n == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }))
            .expect("delta source is normalized")
    }

    pub fn eval(&self, m1: u64, m2: u64) -> Result<ComplexValue> {
        (self.eval)(m1, m2)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Which of the two weights: V (numerator shifts −μ) or Ṽ (shifts +μ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    V,
    VTilde,
}

/// ln of Γ_R(z)Γ_R(z+1) = 2^{1−z}π^{−z}Γ(z).
pub(crate) fn ln_gamma_pair(z: ComplexValue) -> Result<ComplexValue> {
    Ok((1.0 - z) * LN_2 - z * PI.ln() + ln_gamma(z)?)
}

/// ln of the six-factor gamma quotient at s.
fn ln_ratio(s: ComplexValue, k: u32, mu: &LanglandsParameter, which: Weight, base: ComplexValue) -> Result<ComplexValue> {
    let half = k as f64 / 2.0;
    let sign = match which {
        Weight::V => -1.0,
        Weight::VTilde => 1.0,
    };
    let mut out = -base;
    for m in mu.mu {
        out += ln_gamma_pair(s + half + sign * m)?;
    }
    Ok(out)
}

fn ln_base(k: u32, mu: &LanglandsParameter) -> Result<ComplexValue> {
    let half = k as f64 / 2.0;
    let mut out = c(0.0, 0.0);
    for m in mu.mu {
        out += ln_gamma_pair(c(half, 0.0) - m)?;
    }
    Ok(out)
}

/// Abscissa of the line used for a given y.
pub(crate) fn abscissa(y: f64) -> f64 {
    if y < 1.0 {
        -2.0
    } else if y < 1e4 {
        1.0
    } else {
        3.0
    }
}

/// Trapezoid nodes of one weight on one vertical line, premultiplied by step/2π.
#[derive(Debug, Clone)]
struct ContourLine {
    residue: ComplexValue,
    nodes: Vec<(ComplexValue, ComplexValue)>,
}

impl ContourLine {
    fn build(k: u32, mu: &LanglandsParameter, which: Weight, sigma: f64, spec: &QuadratureSpec) -> Result<Self> {
        let base = ln_base(k, mu)?;
        let integrand = |v: f64| -> Result<ComplexValue> {
            let s = c(sigma, v);
            Ok((ln_ratio(s, k, mu, which, base)? + s * s).exp() / s)
        };
        let h = spec.step;
        let mut nodes = vec![(c(sigma, 0.0), integrand(0.0)? * h / (2.0 * PI))];
        let mut peak = nodes[0].1.norm();
        for dir in [1.0, -1.0] {
            let mut quiet = 0;
            let mut j = 1;
            while (j as f64) * h <= spec.height {
                let v = dir * j as f64 * h;
                let w = integrand(v)? * h / (2.0 * PI);
                peak = peak.max(w.norm());
                if w.norm() < 1e-22 * peak {
                    quiet += 1;
                    if quiet >= 8 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
                nodes.push((c(sigma, v), w));
                j += 1;
            }
            if (j as f64) * h > spec.height {
                let edge = nodes.last().map_or(0.0, |n| n.1.norm());
                if edge > spec.tolerance * 1e-3 {
                    return Err(Error::NonConvergence {
                        what: "AFE weight contour",
                        tail: edge,
                        tolerance: spec.tolerance * 1e-3,
                    });
                }
            }
        }
        // fixed order: ascending imaginary part
        nodes.sort_by(|a, b| a.0.im.total_cmp(&b.0.im));
        let residue = if sigma < 0.0 {
            ln_ratio(c(0.0, 0.0), k, mu, which, base)?.exp()
        } else {
            c(0.0, 0.0)
        };
        Ok(Self { residue, nodes })
    }

    fn eval(&self, y: f64) -> ComplexValue {
        let ly = y.ln();
        let sum: CompensatedSum = self.nodes.iter().map(|&(s, w)| w * (-s * ly).exp()).collect();
        sum.value() + self.residue
    }
}

fn check_params(k: u32, mu: &LanglandsParameter, y: f64) -> Result<()> {
    if k < 12 || k % 2 == 1 {
        return Err(Error::InvalidInput(format!("weight {k} must be even and at least 12")));
    }
    if !(y > 0.0 && y <= 1e30) {
        return Err(Error::InvalidInput(format!("y = {y} outside (0, 1e30]")));
    }
    if mu.mu.iter().any(|m| m.re.abs() >= k as f64 / 2.0 - 2.5) {
        return Err(Error::InvalidInput("|Re μ_j| too large for the contour shift".into()));
    }
    Ok(())
}

fn weight(y: f64, k: u32, mu: &LanglandsParameter, which: Weight, q: &QuadratureSpec) -> Result<ComplexValue> {
    q.validate()?;
    check_params(k, mu, y)?;
    let line = ContourLine::build(k, mu, which, abscissa(y), q)?;
    checked(line.eval(y), "AFE weight")
}

/// V_k(y, μ).
pub fn v_weight(y: f64, k: u32, mu: &LanglandsParameter, q: &QuadratureSpec) -> Result<ComplexValue> {
    weight(y, k, mu, Weight::V, q)
}

/// Ṽ_k(y, μ), whose y → 0 limit is Π Γ(k/2+μ_j)/Γ(k/2−μ_j).
pub fn v_tilde_weight(y: f64, k: u32, mu: &LanglandsParameter, q: &QuadratureSpec) -> Result<ComplexValue> {
    weight(y, k, mu, Weight::VTilde, q)
}

/// Both weights on all three lines for one (k, μ), for repeated evaluation.
#[derive(Debug, Clone)]
pub struct WeightTable {
    lines: [[ContourLine; 3]; 2],
}

impl WeightTable {
    pub fn new(k: u32, mu: &LanglandsParameter, q: &QuadratureSpec) -> Result<Self> {
        q.validate()?;
        check_params(k, mu, 1.0)?;
        let build = |which| -> Result<[ContourLine; 3]> {
            Ok([
                ContourLine::build(k, mu, which, -2.0, q)?,
                ContourLine::build(k, mu, which, 1.0, q)?,
                ContourLine::build(k, mu, which, 3.0, q)?,
            ])
        };
        Ok(Self {
            lines: [build(Weight::V)?, build(Weight::VTilde)?],
        })
    }

    pub fn eval(&self, which: Weight, y: f64) -> ComplexValue {
        let set = match which {
            Weight::V => &self.lines[0],
            Weight::VTilde => &self.lines[1],
        };
        let line = match abscissa(y) {
            s if s < 0.0 => &set[0],
            s if s < 2.0 => &set[1],
            _ => &set[2],
        };
        line.eval(y)
    }

    /// max(|V|, |Ṽ|) sampled over [y, 2y].
    fn envelope(&self, y: f64) -> f64 {
        (0..=4)
            .map(|i| y * (1.0 + i as f64 / 4.0))
            .map(|x| self.eval(Weight::V, x).norm().max(self.eval(Weight::VTilde, x).norm()))
            .fold(0.0, f64::max)
    }
}

/// A central value together with its truncation data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfeValue {
    pub value: ComplexValue,
    pub tail_bound: f64,
    pub x_cut: u64,
    pub terms: u64,
}

/// Number of pairs with m₁²m₂ ≤ x.
fn pair_count(x: u64) -> u64 {
    (1..).take_while(|m| m * m <= x).map(|m| x / (m * m)).sum()
}

/// Dyadic estimate of the terms beyond X: block [y, 2y] holds about ζ(2)y
/// pairs of size y^{−1/2}·env(y), coefficients taken at their typical log²y.
fn tail_estimate(table: &WeightTable, x: u64) -> f64 {
    let mut total = 0.0;
    let mut first = None;
    for j in 0..60 {
        let y = x as f64 * 2f64.powi(j);
        let block = 1.645 * y.sqrt() * (y + 2.0).ln().powi(2) * table.envelope(y);
        total += block;
        let f = *first.get_or_insert(block);
        if block < 1e-3 * f {
            break;
        }
    }
    total
}

/// Smallest X whose tail estimate is below tolerance: doubling, then bisection.
fn choose_cut(table: &WeightTable, tolerance: f64) -> Result<u64> {
    let ok = |x: u64| tail_estimate(table, x) < tolerance;
    let mut hi = 1u64;
    while !ok(hi) {
        hi *= 2;
        if hi > 1 << 40 {
            return Err(Error::NonConvergence {
                what: "AFE cutoff search",
                tail: tail_estimate(table, hi),
                tolerance,
            });
        }
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(1);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// L(1/2, f⊗φ) by the two weighted double sums, with X chosen from the tolerance.
pub fn afe_central_value(
    f: &HolomorphicForm,
    mu: &LanglandsParameter,
    a: &CoefficientSource,
    q: &QuadratureSpec,
    budget: u64,
) -> Result<AfeValue> {
    let table = WeightTable::new(f.weight(), mu, q)?;
    let x_cut = choose_cut(&table, q.tolerance)?;
    afe_with_table(f, a, &table, x_cut, budget)
}

/// As [`afe_central_value`] with an explicit cutoff X.
pub fn afe_central_value_with_cut(
    f: &HolomorphicForm,
    mu: &LanglandsParameter,
    a: &CoefficientSource,
    q: &QuadratureSpec,
    budget: u64,
    x_cut: u64,
) -> Result<AfeValue> {
    let table = WeightTable::new(f.weight(), mu, q)?;
    afe_with_table(f, a, &table, x_cut, budget)
}

fn afe_with_table(
    f: &HolomorphicForm,
    a: &CoefficientSource,
    table: &WeightTable,
    x_cut: u64,
    budget: u64,
) -> Result<AfeValue> {
    if !f.weight().is_multiple_of(4) {
        return Err(Error::InvalidInput("root number i^k = 1 needs k ≡ 0 mod 4".into()));
    }
    let terms = pair_count(x_cut);
    if terms > budget {
        return Err(Error::Budget {
            what: "AFE pairs (m1, m2) for the required X_cut",
            needed: terms,
            limit: budget,
        });
    }
    if x_cut as usize > f.n_max() {
        return Err(Error::InsufficientCoefficients {
            required: x_cut,
            available: f.n_max() as u64,
        });
    }
    let rows: Vec<u64> = (1..).take_while(|m| m * m <= x_cut).collect();
    let partial = crate::par::map(&rows, |&m1| -> Result<ComplexValue> {
        let mut row = CompensatedSum::new();
        for m2 in 1..=x_cut / (m1 * m1) {
            let y = (m1 * m1 * m2) as f64;
            let lf = f.try_lambda(m2 as usize)?;
            let first = a.eval(m2, m1)? * table.eval(Weight::V, y);
            let second = a.eval(m1, m2)? * table.eval(Weight::VTilde, y);
            row.add((first + second) * (lf / y.sqrt()));
        }
        Ok(row.value())
    });
    let mut total = CompensatedSum::new();
    for r in partial {
        total.add(r?);
    }
    Ok(AfeValue {
        value: checked(total.value(), "AFE central value")?,
        tail_bound: tail_estimate(table, x_cut),
        x_cut,
        terms,
    })
}
