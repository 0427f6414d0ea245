//! Riemann ζ by Euler–Maclaurin summation.

use super::{checked, CompensatedSum, ComplexValue};
use crate::{Error, Result};

// B₂, B₄, …, B₆₀
const BERNOULLI_EVEN: [f64; 30] = [
    0.16666666666666666, -0.03333333333333333, 0.023809523809523808, -0.03333333333333333,
    0.07575757575757576, -0.2531135531135531, 1.1666666666666667, -7.092156862745098,
    54.971177944862156, -529.1242424242424, 6192.123188405797, -86580.25311355312,
    1425517.1666666667, -27298231.067816094, 601580873.9006424, -15116315767.092157,
    429614643061.1667, -13711655205088.332, 488332318973593.2, -1.9296579341940068e16,
    8.416930475736826e17, -4.0338071854059454e19, 2.1150748638081993e21, -1.2086626522296526e23,
    7.500866746076964e24, -5.038778101481069e26, 3.6528776484818122e28, -2.849876930245088e30,
    2.3865427499683627e32, -2.1399949257225335e34,
];

pub fn riemann_zeta(s: ComplexValue) -> Result<ComplexValue> {
    if (s - 1.0).norm() <= 1e-14 {
        return Err(Error::pole("riemann_zeta", s));
    }
    let n_cut = (s.norm().ceil() as usize + 20).max(10);
    let nf = n_cut as f64;
    let ln_n = nf.ln();

    let mut sum: CompensatedSum = (1..n_cut)
        .map(|n| (-s * (n as f64).ln()).exp())
        .collect();
    let n_pow = (-s * ln_n).exp();
    sum.add(n_pow * nf / (s - 1.0));
    sum.add(n_pow * 0.5);

    // B_{2j}/(2j)! · s(s+1)…(s+2j−2) · N^{−s−2j+1}
    let mut rising = s;
    let mut factorial = 2.0;
    let mut n_power = n_pow / nf;
    for (j, &b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = rising * (b / factorial) * n_power;
        sum.add(term);
        if term.norm() < 1e-17 * sum.value().norm() {
            break;
        }
        let k = 2.0 * (j as f64 + 1.0);
        rising *= (s + (k - 1.0)) * (s + k);
        factorial *= (k + 1.0) * (k + 2.0);
        n_power /= nf * nf;
    }
    checked(sum.value(), "riemann_zeta")
}

#[cfg(test)]
mod tests {
    use super::super::{c, gamma};
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn known_values() {
        assert!((riemann_zeta(c(2.0, 0.0)).unwrap() - PI * PI / 6.0).norm() < 1e-15);
        assert_eq!(riemann_zeta(c(0.0, 0.0)).unwrap(), c(-0.5, 0.0));
        let half = riemann_zeta(c(0.5, 0.0)).unwrap();
        assert!((half - c(-1.460_354_508_809_586_8, 0.0)).norm() < 1e-13);
        assert!(riemann_zeta(c(1.0, 0.0)).is_err());
    }

    // mpmath.zeta
    #[test]
    fn high_on_the_line() {
        let z = riemann_zeta(c(0.5, 100.0)).unwrap();
        let want = c(2.692_619_885_681_324, -0.020_386_029_602_598_162);
        assert!((z - want).norm() < 1e-12 * want.norm(), "{z}");
        let z = riemann_zeta(c(1.0, 3.0)).unwrap();
        let want = c(0.628_851_733_951_825_6, -0.107_475_760_150_586_44);
        assert!((z - want).norm() < 1e-12 * want.norm(), "{z}");
    }

    proptest! {
        #[test]
        fn functional_equation(x in 0.01f64..0.99, y in -40.0f64..40.0) {
            let s = c(x, y);
            let lhs = riemann_zeta(s).unwrap();
            let rhs = c(2.0, 0.0).powc(s) * c(PI, 0.0).powc(s - 1.0) * (s * PI / 2.0).sin()
                * gamma(c(1.0, 0.0) - s).unwrap() * riemann_zeta(c(1.0, 0.0) - s).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }
    }
}
