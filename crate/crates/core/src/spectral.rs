//! Langlands parameters, the Weyl group, the localized test function h and the
//! spectral measure.

use crate::numerics::{
    c, spectral_plane_integral, tan_stable, CompensatedSum, ComplexValue, PlaneDomain,
    QuadratureSpec, I,
};
use crate::{par, Error, Result};
use std::f64::consts::PI;

/// (μ₁, μ₂, μ₃) with μ₁ + μ₂ + μ₃ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanglandsParameter {
    pub mu: [ComplexValue; 3],
}

/// Coordinate permutations in canonical order: identity, the transpositions
/// (12), (13), (23), then the 3-cycles. w(μ)_j = μ_{perm[j]}.
pub const WEYL: [[usize; 3]; 6] = [
    [0, 1, 2],
    [1, 0, 2],
    [2, 1, 0],
    [0, 2, 1],
    [1, 2, 0],
    [2, 0, 1],
];

impl LanglandsParameter {
    pub fn new(mu: [ComplexValue; 3]) -> Result<Self> {
        let scale = 1.0 + mu.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let total = mu[0] + mu[1] + mu[2];
        if total.norm() > 1e-14 * scale || mu.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Langlands parameter must sum to zero, got {total}"
            )));
        }
        Ok(Self { mu })
    }

    /// μ = (it₁, it₂, −i(t₁+t₂)).
    pub fn from_imaginary(t1: f64, t2: f64) -> Self {
        Self {
            mu: [c(0.0, t1), c(0.0, t2), c(0.0, -(t1 + t2))],
        }
    }

    /// Inverse of [`Self::nu`]: μ₁ = 2ν₁ + ν₂, μ₂ = ν₂ − ν₁, μ₃ = −ν₁ − 2ν₂.
    pub fn from_spectral_coords(nu: [ComplexValue; 3]) -> Self {
        let (a, b) = (nu[0], nu[1]);
        Self {
            mu: [2.0 * a + b, b - a, -a - 2.0 * b],
        }
    }

    /// ν₁ = (μ₁−μ₂)/3, ν₂ = (μ₂−μ₃)/3, ν₃ = −ν₁−ν₂.
    pub fn nu(&self) -> [ComplexValue; 3] {
        let [m1, m2, m3] = self.mu;
        let n1 = (m1 - m2) / 3.0;
        let n2 = (m2 - m3) / 3.0;
        [n1, n2, -n1 - n2]
    }

    pub fn permuted(&self, perm: &[usize; 3]) -> Self {
        Self {
            mu: [self.mu[perm[0]], self.mu[perm[1]], self.mu[perm[2]]],
        }
    }

    pub fn weyl_orbit(&self) -> [Self; 6] {
        WEYL.map(|w| self.permuted(&w))
    }

    pub fn neg(&self) -> Self {
        Self {
            mu: self.mu.map(|z| -z),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            mu: self.mu.map(|z| z.conj()),
        }
    }

    /// Euclidean norm ‖μ‖.
    pub fn norm(&self) -> f64 {
        self.mu.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mu.iter().all(|z| z.re.abs() <= tol)
    }

    /// (Im μ₁, Im μ₂), the plane coordinates of a point on Re μ = 0.
    pub fn plane_coords(&self) -> (f64, f64) {
        (self.mu[0].im, self.mu[1].im)
    }
}

pub fn to_spectral_coords(mu: &LanglandsParameter) -> [ComplexValue; 3] {
    mu.nu()
}

pub fn weyl_orbit(mu: &LanglandsParameter) -> [LanglandsParameter; 6] {
    mu.weyl_orbit()
}

/// Inputs of the localized test function.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionSpec {
    pub mu0: LanglandsParameter,
    /// ‖μ⁰‖.
    pub t: f64,
    pub theta: f64,
    /// T^θ.
    pub m: f64,
    pub a0: u32,
    /// Integration window half-width in units of M.
    pub window_radius: f64,
    nu0_sq: [f64; 3],
}

/// Unit direction (2, 1, −3)/√14 used when only T is configured.
pub const DEFAULT_DIRECTION: [f64; 3] = [2.0, 1.0, -3.0];

impl TestFunctionSpec {
    pub fn new(mu0: LanglandsParameter, theta: f64, a0: u32) -> Result<Self> {
        if !mu0.is_unitary(1e-14) {
            return Err(Error::InvalidInput("μ⁰ must be purely imaginary".into()));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidInput(format!("theta must lie in (0,1), got {theta}")));
        }
        let t = mu0.norm();
        if t <= 1.0 {
            return Err(Error::InvalidInput(format!("T = {t} must exceed 1 so that M < T")));
        }
        for z in mu0.mu {
            let a = z.norm();
            if a < t / 4.0 || a > 4.0 * t {
                return Err(Error::InvalidInput(format!(
                    "|μ⁰_j| = {a} outside [T/4, 4T] for T = {t}"
                )));
            }
        }
        let nu0 = mu0.nu();
        if nu0.iter().any(|z| z.norm() == 0.0) {
            return Err(Error::InvalidInput("ν⁰ has a zero coordinate".into()));
        }
        Ok(Self {
            mu0,
            t,
            theta,
            m: t.powf(theta),
            a0,
            window_radius: 12.0,
            nu0_sq: nu0.map(|z| z.norm_sqr()),
        })
    }

    /// μ⁰ = iT·(2, 1, −3)/√14.
    pub fn with_default_direction(t: f64, theta: f64, a0: u32) -> Result<Self> {
        Self::with_direction(t, DEFAULT_DIRECTION, theta, a0)
    }

    /// μ⁰ = iT·d/‖d‖ for a direction d with zero sum.
    pub fn with_direction(t: f64, d: [f64; 3], theta: f64, a0: u32) -> Result<Self> {
        let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = t / n;
        let mu0 = LanglandsParameter::new([c(0.0, d[0] * s), c(0.0, d[1] * s), c(0.0, -(d[0] + d[1]) * s)])?;
        Self::new(mu0, theta, a0)
    }

    /// Union of squares of half-width window_radius·M around the plane
    /// coordinates of the Weyl images of μ⁰.
    pub fn window(&self) -> PlaneDomain {
        PlaneDomain::Boxes {
            centers: self.mu0.weyl_orbit().iter().map(|w| w.plane_coords()).collect(),
            half_width: self.window_radius * self.m,
        }
    }

    /// P(μ) = Π_{0≤n≤A₀} Π_j (ν_j − (1+2n)/3)(ν_j + (1+2n)/3)/|ν⁰_j|².
    pub fn p_factor(&self, mu: &LanglandsParameter) -> ComplexValue {
        let nu = mu.nu();
        let mut p = c(1.0, 0.0);
        for n in 0..=self.a0 {
            let r = (1.0 + 2.0 * n as f64) / 3.0;
            for (z, scale) in nu.iter().zip(&self.nu0_sq) {
                p *= (z * z - r * r) / scale;
            }
        }
        p
    }

    /// Σ_w ψ((w(μ) − μ⁰)/M) with ψ(x) = exp(x₁² + x₂² + x₃²).
    pub fn localizer(&self, mu: &LanglandsParameter) -> ComplexValue {
        let m2 = self.m * self.m;
        mu.weyl_orbit()
            .iter()
            .map(|w| {
                let q: ComplexValue = (0..3).map(|j| (w.mu[j] - self.mu0.mu[j]).powi(2)).sum();
                (q / m2).exp()
            })
            .sum()
    }
}

/// h(μ) = P(μ)² (Σ_w ψ((w(μ) − μ⁰)/M))².
pub fn test_function(mu: &LanglandsParameter, spec: &TestFunctionSpec) -> ComplexValue {
    let p = spec.p_factor(mu);
    let l = spec.localizer(mu);
    p * p * l * l
}

/// spec(μ) = Π_j 3ν_j tan(3πν_j/2).
pub fn spec_measure(mu: &LanglandsParameter) -> Result<ComplexValue> {
    let mut out = c(1.0, 0.0);
    for nu in mu.nu() {
        let z = 3.0 * nu;
        let odd = 2.0 * ((z.re - 1.0) / 2.0).round() + 1.0;
        if (z - odd).norm() <= 1e-10 {
            return Err(Error::pole("spec_measure", nu));
        }
        out *= z * tan_stable(z * (PI / 2.0));
    }
    Ok(out)
}

/// ∬ h·spec dμ over the window (orientation dμ₁dμ₂ = −dt₁dt₂).
pub fn h_spectral_integral(spec: &TestFunctionSpec, q: &QuadratureSpec) -> Result<f64> {
    let window = spec.window();
    let v = spectral_plane_integral(
        |mu| Ok(test_function(mu, spec) * spec_measure(mu)?),
        Some(&window),
        q,
    )?;
    Ok(v.re)
}

/// Lattice points of the spectral window carrying the nonnegative weight
/// −h·spec·step², with points below `cutoff` times the largest weight dropped.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub step: f64,
    pub nodes: Vec<GridNode>,
}

#[derive(Debug, Clone, Copy)]
pub struct GridNode {
    pub index: (i64, i64),
    pub mu: LanglandsParameter,
    pub weight: f64,
}

impl SpectralGrid {
    pub fn build(spec: &TestFunctionSpec, step: f64, cutoff: f64) -> Result<Self> {
        let lattice = spec.window().lattice(step);
        let weights = par::try_map_range(lattice.len(), |n| {
            let (i, j) = lattice[n];
            let mu = LanglandsParameter::from_imaginary(i as f64 * step, j as f64 * step);
            let w = -(test_function(&mu, spec) * spec_measure(&mu)?).re * step * step;
            Ok(w)
        })?;
        let peak = weights.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        let nodes = lattice
            .iter()
            .zip(&weights)
            .filter(|(_, w)| w.abs() > cutoff * peak)
            .map(|(&(i, j), &weight)| GridNode {
                index: (i, j),
                mu: LanglandsParameter::from_imaginary(i as f64 * step, j as f64 * step),
                weight,
            })
            .collect();
        Ok(Self { step, nodes })
    }

    /// Σ weight·f(μ) in lattice order, i.e. ∬ h·f·spec dμ.
    pub fn integrate<F>(&self, f: F) -> Result<ComplexValue>
    where
        F: Fn(&LanglandsParameter) -> Result<ComplexValue> + Sync + Send,
    {
        let vals = par::try_map_range(self.nodes.len(), |n| {
            let node = &self.nodes[n];
            Ok(f(&node.mu)? * node.weight)
        })?;
        let s: CompensatedSum = vals.into_iter().collect();
        Ok(s.value())
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

#[doc(hidden)]
pub fn imaginary(t: [f64; 3]) -> [ComplexValue; 3] {
    t.map(|x| I * x)
}
