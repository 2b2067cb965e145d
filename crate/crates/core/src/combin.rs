//! Small exact combinatorial helpers.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::series::Rational;

pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Product of `num` factorials over product of `den` factorials. Any negative
/// argument in the denominator makes the whole expression vanish (1/(-k)! = 0);
/// negative arguments are not allowed in the numerator.
pub fn fact_ratio(num: &[i64], den: &[i64]) -> Rational {
    if den.iter().any(|&k| k < 0) {
        return Rational::zero();
    }
    assert!(num.iter().all(|&k| k >= 0), "negative factorial in numerator");
    let top: BigInt = num.iter().map(|&k| factorial(k as usize)).product();
    let bottom: BigInt = den.iter().map(|&k| factorial(k as usize)).product();
    Rational::new(top, bottom)
}

/// Binomial coefficient, zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Catalan numbers C_0..=C_m.
pub fn catalan_table(m: usize) -> Vec<BigInt> {
    (0..=m)
        .map(|k| binomial(2 * k as i64, k as i64) / BigInt::from(k + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::int;

    #[test]
    fn small_values() {
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(binomial(6, 2), BigInt::from(15));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(fact_ratio(&[4], &[2, 2]), int(6));
        assert_eq!(fact_ratio(&[4], &[-1]), int(0));
        let c: Vec<i64> = catalan_table(5).iter().map(|b| b.try_into().unwrap()).collect();
        assert_eq!(c, [1, 1, 2, 5, 14, 42]);
    }
}
