//! Exact integer q-expansions of the level-one eigenforms of weight 12, 16, 20.
//!
//! Coefficients of Δ fit in i128 for n ≤ 10⁵ (|τ(n)| < 2¹⁰⁰). The products
//! Δ·E₄ and Δ·E₈ do not, so their convolutions accumulate in a two-limb
//! 256-bit integer.

use crate::arithmetic::sigma;
use crate::{Error, Result};

/// Signed 256-bit integer hi·2¹²⁸ + lo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Wide {
    hi: i128,
    lo: u128,
}

impl Wide {
    pub fn from_i128(v: i128) -> Self {
        Self {
            hi: if v < 0 { -1 } else { 0 },
            lo: v as u128,
        }
    }

    pub fn to_i128(self) -> Option<i128> {
        let lo = self.lo as i128;
        match self.hi {
            0 if lo >= 0 => Some(lo),
            -1 if lo < 0 => Some(lo),
            _ => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.hi < 0 {
            return -self.neg().to_f64();
        }
        self.hi as f64 * 2f64.powi(128) + self.lo as f64
    }

    fn add(self, o: Self) -> Self {
        let (lo, carry) = self.lo.overflowing_add(o.lo);
        let hi = self
            .hi
            .checked_add(o.hi)
            .and_then(|h| h.checked_add(carry as i128))
            .expect("256-bit coefficient overflow");
        Self { hi, lo }
    }

    fn neg(self) -> Self {
        let lo = (!self.lo).wrapping_add(1);
        let hi = (!self.hi).wrapping_add((lo == 0) as i128);
        Self { hi, lo }
    }

    /// Exact product of two i128 values.
    pub fn mul(a: i128, b: i128) -> Self {
        let negative = (a < 0) != (b < 0);
        let (x, y) = (a.unsigned_abs(), b.unsigned_abs());
        let mask = u64::MAX as u128;
        let (x0, x1) = (x & mask, x >> 64);
        let (y0, y1) = (y & mask, y >> 64);
        let p00 = x0 * y0;
        let p01 = x0 * y1;
        let p10 = x1 * y0;
        let p11 = x1 * y1;
        let mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
        let lo = (p00 & mask) | (mid << 64);
        let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
        assert!(hi < (1u128 << 127), "256-bit coefficient overflow");
        let w = Self {
            hi: hi as i128,
            lo,
        };
        if negative {
            w.neg()
        } else {
            w
        }
    }
}

/// Coefficients of q·Π(1−qⁿ)²⁴ at n = 0..=n_max.
pub fn delta_expansion(n_max: usize) -> Result<Vec<i128>> {
    // Jacobi: Π(1−qⁿ)³ = Σ_m (−1)^m (2m+1) q^{m(m+1)/2}
    let len = n_max; // Δ/q needs q⁰..q^{n_max−1}
    let mut jacobi = Vec::new();
    let mut m = 0usize;
    while m * (m + 1) / 2 < len {
        let sign = if m.is_multiple_of(2) { 1 } else { -1 };
        jacobi.push((m * (m + 1) / 2, sign * (2 * m as i128 + 1)));
        m += 1;
    }
    let mut power = vec![0i128; len];
    for &(e, v) in &jacobi {
        power[e] = v;
    }
    for _ in 1..8 {
        let mut next = vec![0i128; len];
        for (i, &a) in power.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(e, v) in &jacobi {
                if i + e >= len {
                    break;
                }
                next[i + e] = a
                    .checked_mul(v)
                    .and_then(|p| next[i + e].checked_add(p))
                    .ok_or(Error::Overflow("eta-product expansion"))?;
            }
        }
        power = next;
    }
    let mut out = vec![0i128; n_max + 1];
    out[1..].copy_from_slice(&power);
    Ok(out)
}

/// 1 + c·Σσ_{k−1}(n)qⁿ, the Eisenstein series of weight k = 4 (c = 240) or 8 (c = 480).
pub fn eisenstein_expansion(weight: u32, n_max: usize) -> Result<Vec<i128>> {
    let factor: i128 = match weight {
        4 => 240,
        8 => 480,
        _ => return Err(Error::UnsupportedWeight(weight)),
    };
    let mut out = vec![1i128; n_max + 1];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        let s = sigma(n as u64, weight - 1);
        *slot = (s as i128)
            .checked_mul(factor)
            .ok_or(Error::Overflow("Eisenstein expansion"))?;
    }
    Ok(out)
}

/// q-expansion coefficients a(0..=n_max) of the normalized eigenform of weight k.
pub fn eigenform_expansion(k: u32, n_max: usize) -> Result<Vec<Wide>> {
    let delta = delta_expansion(n_max)?;
    let other = match k {
        12 => return Ok(delta.into_iter().map(Wide::from_i128).collect()),
        // dim S_k = 1 for k = 16, 20, spanned by Δ·E₄ and Δ·E₄² = Δ·E₈
        16 => eisenstein_expansion(4, n_max)?,
        20 => eisenstein_expansion(8, n_max)?,
        _ => return Err(Error::UnsupportedWeight(k)),
    };
    let out = crate::par::map_range(n_max + 1, |n| {
        let mut acc = Wide::default();
        for j in 1..=n {
            acc = acc.add(Wide::mul(delta[j], other[n - j]));
        }
        acc
    });
    Ok(out)
}

/// Exact a(n) at the given indices only; each costs one length-n convolution.
pub fn eigenform_coefficients_at(k: u32, n_max: usize, indices: &[usize]) -> Result<Vec<Wide>> {
    let delta = delta_expansion(n_max)?;
    if k == 12 {
        return Ok(indices.iter().map(|&n| Wide::from_i128(delta[n])).collect());
    }
    let other = match k {
        16 => eisenstein_expansion(4, n_max)?,
        20 => eisenstein_expansion(8, n_max)?,
        _ => return Err(Error::UnsupportedWeight(k)),
    };
    Ok(crate::par::map(indices, |&n| {
        let mut acc = Wide::default();
        for j in 1..=n {
            acc = acc.add(Wide::mul(delta[j], other[n - j]));
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramanujan_tau() {
        let d = delta_expansion(12).unwrap();
        assert_eq!(
            &d[..],
            &[0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944]
        );
    }

    #[test]
    fn e4_squared_is_e8() {
        let e4 = eisenstein_expansion(4, 40).unwrap();
        let e8 = eisenstein_expansion(8, 40).unwrap();
        for n in 0..=40 {
            let sq: i128 = (0..=n).map(|j| e4[j] * e4[n - j]).sum();
            assert_eq!(sq, e8[n]);
        }
    }

    #[test]
    fn wide_products() {
        for &(a, b) in &[(3i128, -7i128), (i128::MAX / 3, 5), (-(1i128 << 100), 1i128 << 90), (-12345, -6789)] {
            let w = Wide::mul(a, b);
            let f = a as f64 * b as f64;
            assert!((w.to_f64() - f).abs() <= 1e-15 * f.abs());
            if let Some(p) = a.checked_mul(b) {
                assert_eq!(w.to_i128(), Some(p));
            } else {
                assert_eq!(w.to_i128(), None);
            }
        }
        let s = Wide::mul(1 << 100, 1 << 100).add(Wide::mul(-(1 << 100), 1 << 100));
        assert_eq!(s.to_i128(), Some(0));
    }

    #[test]
    fn weight_sixteen_second_coefficient() {
        let a = eigenform_expansion(16, 5).unwrap();
        assert_eq!(a[1].to_i128(), Some(1));
        assert_eq!(a[2].to_i128(), Some(-24 + 240));
        let a = eigenform_expansion(20, 3).unwrap();
        assert_eq!(a[2].to_i128(), Some(-24 + 480));
    }
}
