//! Exact integer and modular utilities.

use crate::numerics::{c, ComplexValue};
use crate::{Error, Result};
use std::f64::consts::PI;

/// A residue class value mod modulus with 0 ≤ value < modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(a: i64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidInput("modulus must be at least 1".into()));
        }
        Ok(Self {
            value: a.rem_euclid(modulus as i64) as u64,
            modulus,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self {
            value: mod_inverse(self.value as i64, self.modulus as i64)? as u64,
            modulus: self.modulus,
        })
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    num_integer::gcd(a, b)
}

/// (g, x, y) with a·x + b·y = g = gcd(a, b) ≥ 0.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut x0, mut x1) = (1i128, 0i128);
    let (mut y0, mut y1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (r0, x0, y0) = (-r0, -x0, -y0);
    }
    (r0 as i64, x0 as i64, y0 as i64)
}

/// b with a·b ≡ 1 (mod m), 0 ≤ b < m; 0 for m = 1.
pub fn mod_inverse(a: i64, m: i64) -> Result<i64> {
    if m < 1 {
        return Err(Error::InvalidInput(format!("modulus {m} < 1")));
    }
    if m == 1 {
        return Ok(0);
    }
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    if g != 1 {
        return Err(Error::NotCoprime { a, m });
    }
    Ok(x.rem_euclid(m))
}

/// e(a/c) = exp(2πi·a/c) after exact reduction of a mod c.
pub fn e_frac(a: i64, c_: i64) -> ComplexValue {
    e_frac_i128(a as i128, c_ as i128)
}

pub(crate) fn e_frac_i128(a: i128, m: i128) -> ComplexValue {
    debug_assert!(m >= 1);
    let r = a.rem_euclid(m);
    // exact quarter turns
    if (4 * r) % m == 0 {
        return match 4 * r / m {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
    }
    // fold into (−1/2, 1/2] before the trig call
    let r = if 2 * r > m { r - m } else { r };
    let x = 2.0 * PI * (r as f64 / m as f64);
    c(x.cos(), x.sin())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin, exact for all 64-bit n.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const TRIAL_LIMIT: u64 = 1_000_000;
pub const FACTOR_LIMIT: u64 = 1_000_000_000_000;

/// Prime factorization, primes ascending. Trial division up to 10⁶; any
/// cofactor left is prime because n ≤ 10¹².
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    assert!((1..=FACTOR_LIMIT).contains(&n), "factorize needs 1 ≤ n ≤ 10^12, got {n}");
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m && p <= TRIAL_LIMIT {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        debug_assert!(is_prime(m));
        out.push((m, 1));
    }
    out
}

pub fn mobius(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All positive divisors of n, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

/// Primes ≤ n by the sieve of Eratosthenes.
pub fn primes_up_to(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Smallest prime factor of every n ≤ limit (spf[0] = spf[1] = 0).
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            for j in (i..=limit).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    spf
}

/// Number of ordered triples d₁d₂d₃ = n.
pub fn tau3(n: u64) -> u64 {
    factorize(n)
        .iter()
        .map(|&(_, e)| (e as u64 + 1) * (e as u64 + 2) / 2)
        .product()
}

pub fn sigma(n: u64, k: u32) -> u128 {
    factorize(n)
        .iter()
        .map(|&(p, e)| (0..=e).map(|i| (p as u128).pow(i * k)).sum::<u128>())
        .product()
}
