use std::collections::BTreeMap;
use std::path::Path;

use crate::arithmetic::{factorize, is_prime, primes_up_to};
use crate::{Error, Result};

/// Exponent toward Ramanujan for GL(2) Maass forms: |λ_g(p)| ≤ 2p^θ.
pub const RAMANUJAN_EXPONENT: f64 = 7.0 / 64.0;

/// One Hecke–Maass cusp form for SL₂(ℤ) given by its Hecke eigenvalues at primes.
#[derive(Debug, Clone, PartialEq)]
pub struct MaassFormRecord {
    pub t_g: f64,
    pub lambda: BTreeMap<u64, f64>,
    /// L(1, Ad² g)
    pub ad2_value: f64,
    pub source_id: String,
}

impl MaassFormRecord {
    pub fn new(t_g: f64, ad2_value: f64, lambda: BTreeMap<u64, f64>, source_id: impl Into<String>) -> Result<Self> {
        let r = Self {
            t_g,
            lambda,
            ad2_value,
            source_id: source_id.into(),
        };
        r.validate().map_err(Error::InvalidInput)?;
        Ok(r)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !(self.t_g.is_finite() && self.t_g > 0.0) {
            return Err(format!("t_g = {} must be positive", self.t_g));
        }
        if !(self.ad2_value.is_finite() && self.ad2_value > 0.0) {
            return Err(format!("L(1, Ad² g) = {} must be positive", self.ad2_value));
        }
        for (&p, &l) in &self.lambda {
            if !is_prime(p) {
                return Err(format!("{p} is not prime"));
            }
            let bound = (p as f64).powf(RAMANUJAN_EXPONENT) + 0.01;
            if !l.is_finite() || l.abs() > bound {
                return Err(format!("|λ({p})| = {} exceeds {bound:.4}", l.abs()));
            }
        }
        Ok(())
    }

    pub fn lambda_prime(&self, p: u64) -> Result<f64> {
        self.lambda.get(&p).copied().ok_or(Error::MissingPrime(p))
    }

    /// Largest prime P such that every prime ≤ P has an eigenvalue.
    pub fn largest_prime(&self) -> Option<u64> {
        let top = *self.lambda.keys().next_back()?;
        let mut last = None;
        for (&key, p) in self.lambda.keys().zip(primes_up_to(top as usize)) {
            if key != p {
                break;
            }
            last = Some(p);
        }
        last
    }

    /// λ_g(n) through the Hecke recursion λ(p^{r+1}) = λ(p)λ(p^r) − λ(p^{r−1}).
    pub fn lambda_at(&self, n: u64) -> Result<f64> {
        let mut out = 1.0;
        for (p, e) in factorize(n) {
            let lp = self.lambda_prime(p)?;
            let (mut prev, mut cur) = (1.0, lp);
            for _ in 1..e {
                (prev, cur) = (cur, lp * cur - prev);
            }
            out *= cur;
        }
        Ok(out)
    }
}

fn prime_column(name: &str) -> Option<u64> {
    let name = name.trim();
    let digits = name
        .strip_prefix("lambda_")
        .or_else(|| name.strip_prefix('p'))
        .unwrap_or(name);
    digits.parse().ok()
}

/// Reads a header-tagged CSV: t_g, ad2_value, then one λ column per prime.
pub fn ingest_maass_data(path: &Path) -> Result<Vec<MaassFormRecord>> {
    let text = std::fs::read_to_string(path)?;
    parse_maass_csv(&text, &path.display().to_string())
}

pub fn parse_maass_csv(text: &str, source: &str) -> Result<Vec<MaassFormRecord>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 2 || names[0] != "t_g" || !matches!(names[1], "ad2_value" | "ad2") {
        return Err(Error::Parse {
            line: 1,
            message: "header must begin with t_g,ad2_value".into(),
        });
    }
    let mut primes = Vec::new();
    for name in &names[2..] {
        match prime_column(name) {
            Some(p) if is_prime(p) => primes.push(p),
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("column {name:?} does not name a prime"),
                })
            }
        }
    }

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> Result<f64> {
            let field = row.get(i).unwrap_or("");
            field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("field {} = {field:?} is not a number", names[i]),
            })
        };
        let mut lambda = BTreeMap::new();
        for (j, &p) in primes.iter().enumerate() {
            if row.get(j + 2).is_some_and(|f| !f.is_empty()) {
                lambda.insert(p, num(j + 2)?);
            }
        }
        let record = MaassFormRecord {
            t_g: num(0)?,
            ad2_value: num(1)?,
            lambda,
            source_id: format!("{source}:{line}"),
        };
        record
            .validate()
            .map_err(|message| Error::Validation { line, message })?;
        out.push(record);
    }
    Ok(out)
}
