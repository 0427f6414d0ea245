//! Level-one holomorphic Hecke eigenforms, their L-values, and externally
//! supplied GL(2) Maass form data.

mod lvalue;
mod maass;
pub mod qexp;

pub use lvalue::{
    euler_l_value, l_value, maass_l_value, maass_l_value_truncated, rankin_selberg_gl2_value, rankin_selberg_truncated,
    TruncatedValue,
};
pub use maass::{ingest_maass_data, parse_maass_csv, MaassFormRecord, RAMANUJAN_EXPONENT};

use std::io::{BufRead, Write};

use crate::arithmetic::{primes_up_to, smallest_prime_factors};
use crate::{Error, Result};

/// Largest table length accepted by [`build_eigenform`].
pub const MAX_COEFFICIENTS: usize = 100_000;

/// Normalized Hecke eigenvalues λ_f(n), n = 1..=n_max, of a level-one cusp form.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicForm {
    weight: u32,
    // index 0 is unused and holds 0
    lambda: Vec<f64>,
}

impl HolomorphicForm {
    /// Wraps an eigenvalue table, e.g. one read back from a cache.
    pub fn from_table(weight: u32, lambda: Vec<f64>) -> Result<Self> {
        if !matches!(weight, 12 | 16 | 20) {
            return Err(Error::UnsupportedWeight(weight));
        }
        if lambda.len() < 2 || (lambda[1] - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidInput("eigenvalue table must start with λ(1) = 1".into()));
        }
        Ok(Self { weight, lambda })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn n_max(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn lambda(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return None;
        }
        self.lambda.get(n).copied()
    }

    /// λ_f(n) for 1 ≤ n ≤ n_max, or the insufficient-coefficients error.
    pub fn try_lambda(&self, n: usize) -> Result<f64> {
        self.lambda(n).ok_or(Error::InsufficientCoefficients {
            required: n as u64,
            available: self.n_max() as u64,
        })
    }

    /// Table slice with index 0 unused.
    pub fn table(&self) -> &[f64] {
        &self.lambda
    }

    /// Unnormalized a(n) = λ(n)·n^{(k−1)/2} as a float.
    pub fn a(&self, n: usize) -> Option<f64> {
        self.lambda(n)
            .map(|l| l * (n as f64).powf((self.weight as f64 - 1.0) / 2.0))
    }

    /// Largest deviation from the Hecke relations over m·n ≤ n_max.
    pub fn hecke_defect(&self) -> f64 {
        let n_max = self.n_max();
        let mut worst = 0.0f64;
        for m in 1..=n_max {
            for n in m..=n_max / m {
                let g = crate::arithmetic::gcd(m as i64, n as i64) as usize;
                let rhs: f64 = (1..=g)
                    .filter(|d| g.is_multiple_of(*d))
                    .map(|d| self.lambda[m * n / (d * d)])
                    .sum();
                worst = worst.max((self.lambda[m] * self.lambda[n] - rhs).abs());
            }
        }
        worst
    }

    /// Largest |λ_f(p)| over primes p ≤ n_max.
    pub fn max_prime_eigenvalue(&self) -> f64 {
        primes_up_to(self.n_max())
            .into_iter()
            .map(|p| self.lambda[p as usize].abs())
            .fold(0.0, f64::max)
    }

    /// Writes the "n,value" coefficient cache, 17 significant digits per value.
    pub fn write_cache<W: Write>(&self, mut out: W) -> Result<()> {
        for (n, l) in self.lambda.iter().enumerate().skip(1) {
            writeln!(out, "{n},{l:.16e}")?;
        }
        Ok(())
    }

    /// Reads a cache written by [`HolomorphicForm::write_cache`].
    pub fn read_cache<R: BufRead>(weight: u32, input: R) -> Result<Self> {
        let mut lambda = vec![0.0];
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let bad = |message: &str| Error::Corruption {
                line: i + 1,
                message: message.to_string(),
            };
            let (n, v) = line.split_once(',').ok_or_else(|| bad("expected n,value"))?;
            let n: usize = n.trim().parse().map_err(|_| bad("bad index"))?;
            if n != lambda.len() {
                return Err(bad("indices must run 1, 2, 3, ..."));
            }
            let v: f64 = v.trim().parse().map_err(|_| bad("bad value"))?;
            if !v.is_finite() {
                return Err(bad("non-finite value"));
            }
            lambda.push(v);
        }
        if lambda.len() < 2 {
            return Err(Error::Corruption {
                line: 0,
                message: "empty coefficient cache".into(),
            });
        }
        Self::from_table(weight, lambda)
    }
}

/// The normalized eigenform of weight k ∈ {12, 16, 20} with λ_f(n) for n ≤ n_max.
pub fn build_eigenform(k: u32, n_max: usize) -> Result<HolomorphicForm> {
    if !matches!(k, 12 | 16 | 20) {
        return Err(Error::UnsupportedWeight(k));
    }
    if n_max == 0 || n_max > MAX_COEFFICIENTS {
        return Err(Error::InvalidInput(format!(
            "coefficient count {n_max} outside 1..={MAX_COEFFICIENTS}"
        )));
    }
    // exact coefficients at prime powers, the rest by multiplicativity
    let spf = smallest_prime_factors(n_max);
    let is_prime_power = |n: usize| {
        let p = spf[n] as usize;
        let mut m = n;
        while m.is_multiple_of(p) {
            m /= p;
        }
        m == 1
    };
    let powers: Vec<usize> = (2..=n_max).filter(|&n| is_prime_power(n)).collect();
    let exact = qexp::eigenform_coefficients_at(k, n_max, &powers)?;
    let half = (k as f64 - 1.0) / 2.0;
    let mut lambda = vec![0.0; n_max + 1];
    lambda[1] = 1.0;
    for (&n, a) in powers.iter().zip(&exact) {
        lambda[n] = a.to_f64() / (n as f64).powf(half);
    }
    for n in 2..=n_max {
        if !is_prime_power(n) {
            let p = spf[n] as usize;
            let mut q = 1;
            while (n / q) % p == 0 {
                q *= p;
            }
            lambda[n] = lambda[q] * lambda[n / q];
        }
    }
    HolomorphicForm::from_table(k, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_normalization() {
        let f = build_eigenform(12, 10).unwrap();
        assert_eq!(f.lambda(1), Some(1.0));
        assert!((f.lambda(2).unwrap() + 24.0 / 2f64.powf(5.5)).abs() < 1e-15);
    }

    #[test]
    fn weight_sixteen_lambda_two() {
        let f = build_eigenform(16, 4).unwrap();
        assert!((f.lambda(2).unwrap() - 216.0 / 2f64.powf(7.5)).abs() < 1e-15);
    }

    #[test]
    fn multiplicative_fill_matches_full_expansion() {
        for k in [12, 16, 20] {
            let f = build_eigenform(k, 600).unwrap();
            let a = qexp::eigenform_expansion(k, 600).unwrap();
            for (n, an) in a.iter().enumerate().skip(1) {
                let direct = an.to_f64() / (n as f64).powf((k as f64 - 1.0) / 2.0);
                assert!((f.lambda(n).unwrap() - direct).abs() < 1e-13, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn rejects_other_weights() {
        assert_eq!(build_eigenform(14, 10), Err(Error::UnsupportedWeight(14)));
    }

    #[test]
    fn cache_roundtrip_is_exact() {
        let f = build_eigenform(16, 200).unwrap();
        let mut buf = Vec::new();
        f.write_cache(&mut buf).unwrap();
        let g = HolomorphicForm::read_cache(16, buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn corrupt_cache_reports_line() {
        let err = HolomorphicForm::read_cache(12, "1,1.0\n3,0.5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Corruption { line: 2, .. }));
    }
}
