//! μ-plane sums for the main, diagonal and Eisenstein terms.
//!
//! Every inner contour integral has the form (1/2πi)∫_(σ) e^{s²} y^{−s} Π_j F(s − μ_j) ds/s.
//! With μ on the lattice iℤ·step and a line step dividing the lattice step,
//! s − μ_j runs over one arithmetic progression, so F is tabulated once and
//! the sum for each μ is a sequence of table lookups.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::afe::{abscissa, ln_gamma_pair};
use crate::eisenstein::{a_max, a_min, max_normalizer, min_normalizer, MaximalEisenstein, MinimalEisenstein};
use crate::gl2forms::{euler_l_value, rankin_selberg_gl2_value, HolomorphicForm, MaassFormRecord};
use crate::numerics::{c, checked, CompensatedSum, ComplexValue, QuadratureSpec, RealSum};
use crate::spectral::{spec_measure, test_function, LanglandsParameter, TestFunctionSpec};
use crate::{par, Error, Result};

/// Abscissa of the inner integrals of the Eisenstein terms.
pub const INNER_SIGMA: f64 = 3.0;
/// Inner lines are cut at |Im s| ≤ LINE_HEIGHT, where e^{s²} is below e^{−90}.
pub const LINE_HEIGHT: f64 = 10.0;
/// |3ν_j| below this counts as close to the pole of ζ(1 + 3ν_j).
pub const POLE_PROXIMITY: f64 = 1e-3;

const MAX_LINE_STEP: f64 = 0.2;
// lattice points whose weights are below this fraction of the largest are dropped
const LATTICE_CUTOFF: f64 = 1e-15;
// end nodes of an inner line must be this small relative to the sum of |terms|
const LINE_EDGE: f64 = 1e-15;
// exactly on a wall ζ(1 + 3ν) has its pole and 1/𝒩^min vanishes
const WALL: f64 = 1e-12;

/// 1/(192π⁵).
pub fn moment_constant() -> f64 {
    1.0 / (192.0 * PI.powi(5))
}

/// Π_j Γ(k/2 + μ_j)/Γ(k/2 − μ_j).
pub fn gamma_ratio(k: u32, mu: &LanglandsParameter) -> Result<ComplexValue> {
    let half = k as f64 / 2.0;
    let mut l = c(0.0, 0.0);
    for m in mu.mu {
        l += crate::numerics::ln_gamma(half + m)? - crate::numerics::ln_gamma(half - m)?;
    }
    checked(l.exp(), "gamma ratio")
}

/// (1/192π⁵)∬ h·(1 + Π Γ(k/2+μ_j)/Γ(k/2−μ_j))·spec dμ on a given lattice.
pub fn main_term_on(lattice: &MomentLattice, k: u32) -> Result<ComplexValue> {
    Ok(moment_constant() * lattice.integrate_spec(|o| Ok(1.0 + gamma_ratio(k, &o.mu)?))?)
}

/// Weyl orbit of window lattice points, represented by sorted coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Orbit {
    /// μ_j = i·k_j·step, k₁ ≤ k₂ ≤ k₃.
    pub k: [i64; 3],
    pub mu: LanglandsParameter,
    /// Σ h·step² over the members present in the window.
    pub h_weight: f64,
    /// Σ −h·spec·step² over the members, the weight of ∬ · h·spec dμ.
    pub spec_weight: f64,
}

/// The window lattice merged over Weyl orbits. All integrands summed against
/// it must be invariant under permutations of μ.
#[derive(Debug, Clone)]
pub struct MomentLattice {
    pub step: f64,
    pub spec: TestFunctionSpec,
    pub orbits: Vec<Orbit>,
    /// Largest |k_j|.
    pub reach: i64,
}

impl MomentLattice {
    pub fn new(spec: &TestFunctionSpec, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!("lattice step {step} must be positive")));
        }
        let lattice = spec.window().lattice(step);
        let values = par::try_map_range(lattice.len(), |n| {
            let (i, j) = lattice[n];
            let mu = LanglandsParameter::from_imaginary(i as f64 * step, j as f64 * step);
            let h = test_function(&mu, spec).re;
            Ok((h, -h * spec_measure(&mu)?.re))
        })?;
        let h_peak = values.iter().fold(0.0f64, |a, v| a.max(v.0.abs()));
        let s_peak = values.iter().fold(0.0f64, |a, v| a.max(v.1.abs()));
        let mut merged: BTreeMap<[i64; 3], (RealSum, RealSum)> = BTreeMap::new();
        for (&(i, j), &(h, hs)) in lattice.iter().zip(&values) {
            if h.abs() <= LATTICE_CUTOFF * h_peak && hs.abs() <= LATTICE_CUTOFF * s_peak {
                continue;
            }
            let mut k = [i, j, -i - j];
            k.sort_unstable();
            let e = merged.entry(k).or_default();
            e.0.add(h * step * step);
            e.1.add(hs * step * step);
        }
        let orbits: Vec<Orbit> = merged
            .into_iter()
            .map(|(k, (h, s))| Orbit {
                k,
                mu: LanglandsParameter::from_imaginary(k[0] as f64 * step, k[1] as f64 * step),
                h_weight: h.value(),
                spec_weight: s.value(),
            })
            .collect();
        let reach = orbits.iter().map(|o| o.k[0].abs().max(o.k[2].abs())).max().unwrap_or(0);
        Ok(Self {
            step,
            spec: spec.clone(),
            orbits,
            reach,
        })
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Σ weight(o)·f(n, o) in orbit order, n the orbit's index.
    pub fn sum<F, W>(&self, weight: W, f: F) -> Result<ComplexValue>
    where
        F: Fn(usize, &Orbit) -> Result<ComplexValue> + Sync + Send,
        W: Fn(&Orbit) -> f64 + Sync + Send,
    {
        let vals = par::try_map_range(self.orbits.len(), |n| {
            let o = &self.orbits[n];
            Ok(f(n, o)? * weight(o))
        })?;
        Ok(vals.into_iter().collect::<CompensatedSum>().value())
    }

    /// ∬ h·f·spec dμ.
    pub fn integrate_spec<F>(&self, f: F) -> Result<ComplexValue>
    where
        F: Fn(&Orbit) -> Result<ComplexValue> + Sync + Send,
    {
        self.sum(|o| o.spec_weight, |_, o| f(o))
    }
}

/// Nodes s = σ + i·n·line_step, |n| ≤ half, where line_step = lattice_step/ratio.
#[derive(Debug, Clone, Copy)]
struct LineGeometry {
    sigma: f64,
    line_step: f64,
    ratio: i64,
    half: i64,
}

impl LineGeometry {
    fn new(sigma: f64, lattice_step: f64) -> Self {
        let ratio = (lattice_step / MAX_LINE_STEP).ceil().max(1.0) as i64;
        let line_step = lattice_step / ratio as f64;
        Self {
            sigma,
            line_step,
            ratio,
            half: (LINE_HEIGHT / line_step).ceil() as i64,
        }
    }

    fn point(&self, m: i64) -> ComplexValue {
        c(self.sigma, m as f64 * self.line_step)
    }

    /// (line_step/2π)·e^{s²}y^{−s}/s at every node.
    fn weights(&self, y: f64) -> Vec<ComplexValue> {
        let ly = y.ln();
        (-self.half..=self.half)
            .map(|n| {
                let s = self.point(n);
                (s * s - s * ly).exp() / s * (self.line_step / (2.0 * PI))
            })
            .collect()
    }
}

/// ln F at σ + i·m·line_step for m in lo..lo+len.
#[derive(Debug, Clone)]
struct LogTable {
    lo: i64,
    values: Vec<ComplexValue>,
}

impl LogTable {
    fn build<F>(lo: i64, hi: i64, f: F) -> Result<Self>
    where
        F: Fn(i64) -> Result<ComplexValue> + Sync + Send,
    {
        let values = par::try_map_range((hi - lo + 1) as usize, |i| f(lo + i as i64))?;
        Ok(Self { lo, values })
    }

    fn at(&self, m: i64) -> ComplexValue {
        self.values[(m - self.lo) as usize]
    }
}

/// Inner line sums Σ_n w_n exp(Σ_j ln F(s_n − μ_j) − base) for lattice μ.
#[derive(Debug, Clone)]
struct ShiftedLine {
    geometry: LineGeometry,
    weights: Vec<ComplexValue>,
    table: LogTable,
}

impl ShiftedLine {
    fn new<F>(geometry: LineGeometry, y: f64, reach: i64, ln_f: F) -> Result<Self>
    where
        F: Fn(ComplexValue) -> Result<ComplexValue> + Sync + Send,
    {
        let span = geometry.half + geometry.ratio * reach;
        let table = LogTable::build(-span, span, |m| ln_f(geometry.point(m)))?;
        Ok(Self {
            geometry,
            weights: geometry.weights(y),
            table,
        })
    }

    /// μ_j = i·k_j·lattice_step.
    fn eval(&self, k: [i64; 3], base: ComplexValue) -> Result<ComplexValue> {
        let g = &self.geometry;
        let mut sum = CompensatedSum::new();
        let mut size = 0.0;
        let mut edge = 0.0;
        for (idx, w) in self.weights.iter().enumerate() {
            let n = idx as i64 - g.half;
            let l: ComplexValue = k.iter().map(|&kj| self.table.at(n - g.ratio * kj)).sum();
            let term = *w * (l - base).exp();
            size += term.norm();
            if n.abs() == g.half {
                edge += term.norm();
            }
            sum.add(term);
        }
        if edge > LINE_EDGE * size {
            return Err(Error::NonConvergence {
                what: "inner line sum",
                tail: edge,
                tolerance: LINE_EDGE * size,
            });
        }
        checked(sum.value(), "inner line sum")
    }
}

fn ln_base(k: u32, mu: &LanglandsParameter) -> Result<ComplexValue> {
    let half = k as f64 / 2.0;
    let mut out = c(0.0, 0.0);
    for m in mu.mu {
        out += ln_gamma_pair(half - m)?;
    }
    Ok(out)
}

fn negated(k: [i64; 3]) -> [i64; 3] {
    k.map(|x| -x)
}

/// The maximal Eisenstein term with the data it rests on.
#[derive(Debug, Clone, PartialEq)]
pub struct EisMaxTerm {
    pub value: ComplexValue,
    /// What the supplied records cover, and what the full sum over g would need.
    pub disclaimer: String,
    /// t_g of the records that met the window.
    pub contributing: Vec<f64>,
    /// Bound on the effect of truncated Rankin–Selberg Euler products.
    pub tail_bound: f64,
    /// u-line truncation actually used.
    pub u_height: f64,
}

/// The minimal Eisenstein term with its wall diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EisMinTerm {
    pub value: ComplexValue,
    /// Orbits with some |3ν_j| < [`POLE_PROXIMITY`].
    pub pole_proximity: usize,
}

/// The computable terms for one (k, p, test function, lattice).
#[derive(Debug, Clone)]
pub struct Workbench {
    pub lattice: MomentLattice,
    pub form: HolomorphicForm,
    pub p: u64,
    pub q: QuadratureSpec,
}

impl Workbench {
    pub fn new(spec: &TestFunctionSpec, step: f64, form: HolomorphicForm, p: u64, q: QuadratureSpec) -> Result<Self> {
        q.validate()?;
        if p == 0 || p as usize > form.n_max() {
            return Err(Error::InsufficientCoefficients {
                required: p,
                available: form.n_max() as u64,
            });
        }
        Ok(Self {
            lattice: MomentLattice::new(spec, step)?,
            form,
            p,
            q,
        })
    }

    pub fn k(&self) -> u32 {
        self.form.weight()
    }

    /// λ_f(p)/p^{3/2}.
    pub fn twist(&self) -> Result<f64> {
        Ok(self.form.try_lambda(self.p as usize)? / (self.p as f64).powf(1.5))
    }

    /// (1/192π⁵)∬ h·(1 + Π Γ(k/2+μ_j)/Γ(k/2−μ_j))·spec dμ.
    pub fn main_term(&self) -> Result<ComplexValue> {
        main_term_on(&self.lattice, self.k())
    }

    fn weight_line(&self, y: f64) -> Result<ShiftedLine> {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::InvalidInput(format!("weight argument {y} must be positive")));
        }
        let half = self.k() as f64 / 2.0;
        ShiftedLine::new(
            LineGeometry::new(abscissa(y), self.lattice.step),
            y,
            self.lattice.reach,
            |z| ln_gamma_pair(z + half),
        )
    }

    /// V_k(y, μ) (or Ṽ_k when `tilde`) at every orbit.
    pub fn weights_at(&self, y: f64, tilde: bool) -> Result<Vec<ComplexValue>> {
        let line = self.weight_line(y)?;
        let left = line.geometry.sigma < 0.0;
        let k = self.k();
        par::try_map_range(self.lattice.len(), |n| {
            let o = &self.lattice.orbits[n];
            // Ṽ(y, μ) = V(y, −μ)·Π Γ(k/2+μ_j)/Γ(k/2−μ_j): same denominator, numerator shifted by +μ
            let k_shift = if tilde { negated(o.k) } else { o.k };
            let mut v = line.eval(k_shift, ln_base(k, &o.mu)?)?;
            // a line left of 0 has passed the pole of 1/s
            if left {
                v += if tilde { gamma_ratio(k, &o.mu)? } else { c(1.0, 0.0) };
            }
            Ok(v)
        })
    }

    /// (1/192π⁵)∬ h·V_k(y, μ)·spec dμ, or with Ṽ_k.
    pub fn weighted_integral(&self, y: f64, tilde: bool) -> Result<ComplexValue> {
        let w = self.weights_at(y, tilde)?;
        Ok(moment_constant() * self.lattice.sum(|o| o.spec_weight, |n, _| Ok(w[n]))?)
    }

    fn diagonal(&self, tilde: bool) -> Result<ComplexValue> {
        Ok(self.twist()? * self.weighted_integral((self.p as f64).powi(3), tilde)?)
    }

    /// (λ_f(p)/p^{3/2})(1/192π⁵)∬ h·V_k(p³, μ)·spec dμ.
    pub fn diagonal_term(&self) -> Result<ComplexValue> {
        self.diagonal(false)
    }

    /// The same with Ṽ_k, the diagonal of the mirror sum.
    pub fn diagonal_tilde_term(&self) -> Result<ComplexValue> {
        self.diagonal(true)
    }

    /// ln L(1/2 + σ + i·m·line_step, f) for |m| ≤ span, from the Euler product.
    ///
    /// On Re s = 3 the inner integrands are about 10⁶ times their integrals, so
    /// L must be exact up to structured terms; the omitted primes only drop
    /// Dirichlet terms whose contribution decays with the weight.
    fn lf_table(&self, g: &LineGeometry, span: i64) -> Result<LogTable> {
        LogTable::build(-span, span, |m| Ok(euler_l_value(&self.form, 0.5 + g.point(m))?.value.ln()))
    }

    /// (1/2πi)∫_(σ) e^{s²} Π_j Γpair(s + k/2 − μ_j)/Γpair(k/2 − μ_j)·L(1/2 + s − μ_j, f) ds/s
    /// for every orbit, σ ≥ 1.
    pub fn inner_min_at_orbits(&self, sigma: f64) -> Result<Vec<ComplexValue>> {
        let geometry = LineGeometry::new(sigma, self.lattice.step);
        let span = geometry.half + geometry.ratio * self.lattice.reach;
        let lf = self.lf_table(&geometry, span)?;
        let half = self.k() as f64 / 2.0;
        let line = ShiftedLine::new(geometry, 1.0, self.lattice.reach, |z| {
            let m = (z.im / geometry.line_step).round() as i64;
            Ok(ln_gamma_pair(z + half)? + lf.at(m))
        })?;
        let k = self.k();
        par::try_map_range(self.lattice.len(), |n| {
            let o = &self.lattice.orbits[n];
            line.eval(o.k, ln_base(k, &o.mu)?)
        })
    }

    /// (1/24(2πi)²)∬ A^min(p,p)·h/𝒩^min·𝓘^min_k dμ with the inner integral on Re s = 3.
    pub fn eis_min_term(&self) -> Result<EisMinTerm> {
        let inner = self.inner_min_at_orbits(INNER_SIGMA)?;
        let p = self.p;
        let mut pole_proximity = 0;
        for o in &self.lattice.orbits {
            if o.mu.nu().iter().any(|nu| (3.0 * nu).norm() < POLE_PROXIMITY) {
                pole_proximity += 1;
            }
        }
        let sum = self.lattice.sum(|o| o.h_weight, |n, o| {
            if o.mu.nu().iter().any(|nu| (3.0 * nu).norm() < WALL) {
                return Ok(c(0.0, 0.0));
            }
            let e = MinimalEisenstein::new(o.mu);
            Ok(a_min(&e, p, p)? / min_normalizer(&e)? * inner[n])
        })?;
        // dμ₁dμ₂/(2πi)² = dt₁dt₂/4π²
        Ok(EisMinTerm {
            value: sum / (96.0 * PI * PI),
            pole_proximity,
        })
    }

    /// Σ_g (1/2πi)∫_{Re u = 0} A^max(p,p)·h/𝒩^max·𝓘^max_k du over the supplied records.
    ///
    /// u runs over i·step·ℤ with |Im u| ≤ u_height (default: the reach of the
    /// window); nodes where h is negligible are skipped.
    pub fn eis_max_term(&self, records: &[MaassFormRecord], u_height: Option<f64>) -> Result<EisMaxTerm> {
        if records.is_empty() {
            return Err(Error::NoData("no Maass form records for the maximal Eisenstein term".into()));
        }
        let spec = &self.lattice.spec;
        let step = self.lattice.step;
        let height = u_height.unwrap_or(spec.t + spec.window_radius * spec.m);
        let n_u = (height / step).floor() as i64;
        let h_peak = test_function(&spec.mu0, spec).norm();
        let mu_of = |g: &MaassFormRecord, v: f64| LanglandsParameter {
            mu: [c(0.0, v + g.t_g), c(0.0, v - g.t_g), c(0.0, -2.0 * v)],
        };

        // (record, n, h) for every node that matters
        let mut active = Vec::new();
        for (r, g) in records.iter().enumerate() {
            for n in -n_u..=n_u {
                let h = test_function(&mu_of(g, n as f64 * step), spec).re;
                if h.abs() > LATTICE_CUTOFF * h_peak {
                    active.push((r, n, h));
                }
            }
        }
        let geometry = LineGeometry::new(INNER_SIGMA, step);
        let widest = active.iter().map(|a| a.1.abs()).max().unwrap_or(0);
        let lf = self.lf_table(&geometry, geometry.half + 2 * geometry.ratio * widest)?;
        let weights = geometry.weights(1.0);
        let half = self.k() as f64 / 2.0;
        let k = self.k();
        let p = self.p;

        let terms = par::try_map_range(active.len(), |i| {
            let (r, n, h) = active[i];
            let g = &records[r];
            let u = c(0.0, n as f64 * step);
            let mu = mu_of(g, u.im);
            let e = MaximalEisenstein::new(u, g.clone());
            let base = ln_base(k, &mu)?;
            let mut inner = CompensatedSum::new();
            let mut tail = 0.0;
            let (mut size, mut edge) = (0.0, 0.0);
            for (idx, w) in weights.iter().enumerate() {
                let m = idx as i64 - geometry.half;
                let s = geometry.point(m);
                let mut l = lf.at(m + 2 * geometry.ratio * n) - base;
                for mj in mu.mu {
                    l += ln_gamma_pair(s + half - mj)?;
                }
                let rs = rankin_selberg_gl2_value(&self.form, g, 0.5 + s - u)?;
                let a = *w * l.exp();
                let term = a * rs.value;
                tail += a.norm() * rs.tail_bound;
                size += term.norm();
                if m.abs() == geometry.half {
                    edge += term.norm();
                }
                inner.add(term);
            }
            if edge > LINE_EDGE * size {
                return Err(Error::NonConvergence {
                    what: "maximal Eisenstein inner line",
                    tail: edge,
                    tolerance: LINE_EDGE * size,
                });
            }
            // du/2πi = dv/2π
            let scale = a_max(&e, p, p)? * h / max_normalizer(&e, &self.q)? * (step / (2.0 * PI));
            Ok((inner.value() * scale, tail * scale.norm()))
        })?;
        let mut value = CompensatedSum::new();
        let mut tail_bound = 0.0;
        for (v, t) in terms {
            value.add(v);
            tail_bound += t;
        }

        let mut contributing: Vec<f64> = active.iter().map(|a| records[a.0].t_g).collect();
        contributing.dedup();
        let (lo, hi) = records
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), g| (a.min(g.t_g), b.max(g.t_g)));
        let disclaimer = format!(
            "{} record(s) supplied with t_g in [{lo:.6}, {hi:.6}], {} of them met the window; \
             the sum over g is complete only if every Hecke-Maass form with t_g in [{:.6}, {:.6}] is present",
            records.len(),
            contributing.len(),
            (spec.t - spec.m).max(0.0),
            spec.t + spec.m,
        );
        Ok(EisMaxTerm {
            value: checked(value.value(), "maximal Eisenstein term")?,
            disclaimer,
            contributing,
            tail_bound,
            u_height: height,
        })
    }
}
