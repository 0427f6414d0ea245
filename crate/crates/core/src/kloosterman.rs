//! GL(3) Kloosterman sums by brute force over residue systems, a classical
//! Kloosterman sum for cross-checks, and Weil-type bound verification.

use crate::arithmetic::{divisors, e_frac_i128, ext_gcd, gcd, mod_inverse};
use crate::numerics::{CompensatedSum, ComplexValue};
use crate::{par, Error, Result};
use std::collections::HashMap;
use std::sync::RwLock;

/// Arguments (n₁, n₂, m₁, m₂, D₁, D₂); m₂ is ignored by the incomplete sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KloostermanInput {
    pub n1: i64,
    pub n2: i64,
    pub m1: i64,
    pub m2: i64,
    pub d1: u64,
    pub d2: u64,
}

impl KloostermanInput {
    pub fn new(n1: i64, n2: i64, m1: i64, m2: i64, d1: u64, d2: u64) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidInput("moduli D1, D2 must be at least 1".into()));
        }
        Ok(Self {
            n1,
            n2,
            m1,
            m2,
            d1,
            d2,
        })
    }

    /// Incomplete-sum arguments (n₁, n₂, m₁, D₁, D₂).
    pub fn incomplete(n1: i64, n2: i64, m1: i64, d1: u64, d2: u64) -> Result<Self> {
        Self::new(n1, n2, m1, 0, d1, d2)
    }
}

pub const INCOMPLETE_BUDGET: u64 = 100_000_000;
pub const COMPLETE_BUDGET: u64 = 1_000_000;
pub const CLASSICAL_MAX_MODULUS: u64 = 100_000;

/// Σ_{x mod c, (x,c)=1} e((ax + b·x̄)/c).
pub fn classical_kloosterman(a: i64, b: i64, c: u64) -> Result<ComplexValue> {
    if c == 0 || c > CLASSICAL_MAX_MODULUS {
        return Err(Error::Budget {
            what: "classical Kloosterman modulus",
            needed: c,
            limit: CLASSICAL_MAX_MODULUS,
        });
    }
    let m = c as i128;
    let mut s = CompensatedSum::new();
    for x in 0..c as i64 {
        if gcd(x, c as i64) != 1 {
            continue;
        }
        let xb = mod_inverse(x, c as i64)? as i128;
        s.add(e_frac_i128(a as i128 * x as i128 + b as i128 * xb, m));
    }
    Ok(s.value())
}

/// S̃(n₁,n₂,m₁,D₁,D₂) = Σ_{C₁ mod D₁, C₂ mod D₂, (C₁,D₁)=(C₂,D₂/D₁)=1}
/// e(n₂C̄₁C₂/D₁ + m₁C̄₂/(D₂/D₁) + n₁C₁/D₁).
pub fn incomplete_kloosterman(input: &KloostermanInput) -> Result<ComplexValue> {
    let rows = incomplete_rows(input)?;
    let s: CompensatedSum = rows.into_iter().flatten().collect();
    Ok(s.value())
}

/// Terms of the incomplete sum grouped by C₁, each row ordered by C₂.
fn incomplete_rows(input: &KloostermanInput) -> Result<Vec<Vec<ComplexValue>>> {
    let (d1, d2) = (input.d1, input.d2);
    if d2 % d1 != 0 {
        return Err(Error::Divisibility { d1, d2 });
    }
    let needed = d1.saturating_mul(d2);
    if needed > INCOMPLETE_BUDGET {
        return Err(Error::Budget {
            what: "incomplete Kloosterman D1·D2",
            needed,
            limit: INCOMPLETE_BUDGET,
        });
    }
    let q = (d2 / d1) as i64;
    let (d1i, d2i) = (d1 as i64, d2 as i128);
    let c2_inverses: Vec<Option<i128>> = (0..d2 as i64)
        .map(|c2| mod_inverse(c2, q).ok().map(|v| v as i128))
        .collect();
    let (n1, n2, m1) = (input.n1 as i128, input.n2 as i128, input.m1 as i128);
    let rows = par::map_range(d1 as usize, |c1| {
        let c1 = c1 as i64;
        let Ok(c1b) = mod_inverse(c1, d1i) else {
            return Vec::new();
        };
        let (c1, c1b) = (c1 as i128, c1b as i128);
        c2_inverses
            .iter()
            .enumerate()
            .filter_map(|(c2, inv)| {
                let c2b = (*inv)?;
                // common denominator D₂
                let num = (n2 * c1b * c2 as i128 + n1 * c1) * q as i128 + m1 * c2b * d1i as i128;
                Some(e_frac_i128(num, d2i))
            })
            .collect()
    });
    Ok(rows)
}

/// Number of (C₁, C₂) pairs summed by the incomplete sum.
pub fn incomplete_term_count(d1: u64, d2: u64) -> u64 {
    let q = d2 / d1;
    let phi = |n: u64| (1..=n).filter(|&x| gcd(x as i64, n as i64) == 1).count() as u64;
    // C₂ runs over D₂ residues, of which a fraction φ(q)/q is coprime to q
    phi(d1) * (d2 / q) * phi(q)
}

/// (Y, Z) with Y·b + Z·c ≡ 1 (mod d), smallest nonnegative representatives.
fn yz(b: i64, c: i64, d: i64) -> Option<(i64, i64)> {
    if d == 1 {
        return Some((0, 0));
    }
    let (g, u, v) = ext_gcd(b, c);
    let gi = mod_inverse(g, d).ok()?;
    Some((
        ((u as i128 * gi as i128).rem_euclid(d as i128)) as i64,
        ((v as i128 * gi as i128).rem_euclid(d as i128)) as i64,
    ))
}

/// The complete sum S(n₁,n₂,m₁,m₂,D₁,D₂).
///
/// Evaluated twice, with the canonical (Y_j, Z_j) and with the shift
/// Y_j + C_j, Z_j − B_j; the two must agree.
pub fn complete_kloosterman(input: &KloostermanInput) -> Result<ComplexValue> {
    let a = complete_kloosterman_shifted(input, 0, 0)?;
    let b = complete_kloosterman_shifted(input, 1, 1)?;
    if (a - b).norm() > 1e-9 {
        return Err(Error::Consistency(format!(
            "complete Kloosterman sum depends on the (Y,Z) choice: {a} vs {b} for {input:?}"
        )));
    }
    Ok(a)
}

/// Complete sum with Y_j → Y_j + k_j·C_j, Z_j → Z_j − k_j·B_j.
pub fn complete_kloosterman_shifted(input: &KloostermanInput, k1: i64, k2: i64) -> Result<ComplexValue> {
    let (d1, d2) = (input.d1 as i64, input.d2 as i64);
    let needed = input.d1.saturating_mul(input.d2);
    if needed > COMPLETE_BUDGET {
        return Err(Error::Budget {
            what: "complete Kloosterman D1·D2",
            needed,
            limit: COMPLETE_BUDGET,
        });
    }
    let modulus = d1 as i128 * d2 as i128;
    let (n1, n2, m1, m2) = (
        input.n1 as i128,
        input.n2 as i128,
        input.m1 as i128,
        input.m2 as i128,
    );
    // one row per (B₁, C₁); C₂ is forced by the congruence once B₂ is chosen
    let rows = par::map_range((d1 * d1) as usize, |idx| {
        let (b1, c1) = (idx as i64 / d1, idx as i64 % d1);
        let mut row = CompensatedSum::new();
        if gcd(gcd(b1, c1), d1) != 1 {
            return row.value();
        }
        let (y1, z1) = yz(b1, c1, d1).expect("gcd checked");
        let (y1, z1) = (y1 as i128 + k1 as i128 * c1 as i128, z1 as i128 - k1 as i128 * b1 as i128);
        for b2 in 0..d2 {
            let t = b1 as i128 * b2 as i128 + d2 as i128 * c1 as i128;
            if t % d1 as i128 != 0 {
                continue;
            }
            let c2 = (-(t / d1 as i128)).rem_euclid(d2 as i128) as i64;
            if gcd(gcd(b2, c2), d2) != 1 {
                continue;
            }
            let (y2, z2) = yz(b2, c2, d2).expect("gcd checked");
            let (y2, z2) = (y2 as i128 + k2 as i128 * c2 as i128, z2 as i128 - k2 as i128 * b2 as i128);
            let (b1, b2) = (b1 as i128, b2 as i128);
            let first = n1 * b1 + m1 * (y1 * d2 as i128 - z1 * b2);
            let second = m2 * b2 + n2 * (y2 * d1 as i128 - z2 * b1);
            row.add(e_frac_i128(first * d2 as i128 + second * d1 as i128, modulus));
        }
        row.value()
    });
    let s: CompensatedSum = rows.into_iter().collect();
    Ok(s.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumKind {
    Incomplete,
    Complete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeilRow {
    pub kind: SumKind,
    pub input: KloostermanInput,
    pub magnitude: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Arguments (n₁, n₂, m₁, m₂) used by [`weil_bound_report`].
pub const WEIL_ARGUMENTS: [(i64, i64, i64, i64); 3] = [(1, 1, 1, 1), (1, 2, 3, 1), (2, 3, 1, 2)];

fn tau(n: u64) -> f64 {
    divisors(n).len() as f64
}

/// Bound for |S̃|: τ(D₁D₂)·min((m₁, D₂/D₁)D₁², (n₁, n₂, D₁)D₂), the divisor
/// function standing in for (D₁D₂)^ε.
pub fn incomplete_bound(input: &KloostermanInput) -> f64 {
    let (d1, d2) = (input.d1 as i64, input.d2 as i64);
    let a = gcd(input.m1, d2 / d1) as f64 * (d1 * d1) as f64;
    let b = gcd(gcd(input.n1, input.n2), d1) as f64 * d2 as f64;
    tau(input.d1 * input.d2) * a.min(b)
}

/// Bound for |S|: τ(D₁D₂)·(D₁D₂)^{1/2}{(D₁,D₂)(m₁n₁,[D₁,D₂])(m₂n₂,[D₁,D₂])}^{1/2}.
pub fn complete_bound(input: &KloostermanInput) -> f64 {
    let (d1, d2) = (input.d1 as i64, input.d2 as i64);
    let g = gcd(d1, d2);
    let l = d1 / g * d2;
    let inner = g as f64 * gcd(input.m1 * input.n1, l) as f64 * gcd(input.m2 * input.n2, l) as f64;
    tau(input.d1 * input.d2) * ((d1 * d2) as f64).sqrt() * inner.sqrt()
}

/// Both sums against their Weil-type bounds for all D₁, D₂ ≤ max_d.
pub fn weil_bound_report(max_d: u64) -> Result<Vec<WeilRow>> {
    if max_d > 30 {
        return Err(Error::InvalidInput(format!("max_d = {max_d} exceeds 30")));
    }
    let mut rows = Vec::new();
    for &(n1, n2, m1, m2) in &WEIL_ARGUMENTS {
        for d1 in 1..=max_d {
            for d2 in 1..=max_d {
                let input = KloostermanInput::new(n1, n2, m1, m2, d1, d2)?;
                if d2 % d1 == 0 {
                    let magnitude = incomplete_kloosterman(&input)?.norm();
                    let bound = incomplete_bound(&input);
                    rows.push(WeilRow {
                        kind: SumKind::Incomplete,
                        input,
                        magnitude,
                        bound,
                        pass: magnitude <= bound * (1.0 + 1e-12),
                    });
                }
                let magnitude = complete_kloosterman(&input)?.norm();
                let bound = complete_bound(&input);
                rows.push(WeilRow {
                    kind: SumKind::Complete,
                    input,
                    magnitude,
                    bound,
                    pass: magnitude <= bound * (1.0 + 1e-12),
                });
            }
        }
    }
    Ok(rows)
}

/// Memo table keyed by sum kind and the full argument tuple. Reads are
/// concurrent, inserts exclusive.
#[derive(Debug, Default)]
pub struct KloostermanCache {
    table: RwLock<HashMap<(SumKindKey, KloostermanInput), ComplexValue>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SumKindKey {
    Incomplete,
    Complete,
}

impl KloostermanCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(&self, kind: SumKindKey, input: &KloostermanInput) -> Result<ComplexValue> {
        let key = (kind, normalized(kind, input));
        if let Some(v) = self.table.read().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = match kind {
            SumKindKey::Incomplete => incomplete_kloosterman(input)?,
            SumKindKey::Complete => complete_kloosterman(input)?,
        };
        self.table.write().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn insert(&self, kind: SumKindKey, input: KloostermanInput, value: ComplexValue) {
        self.table
            .write()
            .expect("cache lock")
            .insert((kind, normalized(kind, &input)), value);
    }

    pub fn len(&self) -> usize {
        self.table.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries sorted by key.
    pub fn entries(&self) -> Vec<(SumKindKey, KloostermanInput, ComplexValue)> {
        let mut v: Vec<_> = self
            .table
            .read()
            .expect("cache lock")
            .iter()
            .map(|(&(k, i), &z)| (k, i, z))
            .collect();
        v.sort_by_key(|a| (a.0, a.1));
        v
    }
}

fn normalized(kind: SumKindKey, input: &KloostermanInput) -> KloostermanInput {
    match kind {
        SumKindKey::Incomplete => KloostermanInput { m2: 0, ..*input },
        SumKindKey::Complete => *input,
    }
}
