use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

/// Non-negative exact rational, always stored in lowest terms.
///
/// Measured ratios and thresholds (|A+B|/|A|, K, |A|^3/K, ...) are carried in
/// this form so that every accept/reject decision is made by integer
/// cross-multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    pub num: u128,
    pub den: u128,
}

impl Rational {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = num.gcd(&den);
        if g == 0 {
            return Rational { num: 0, den: 1 };
        }
        Rational { num: num / g, den: den / g }
    }

    pub fn integer(n: u128) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn num_big(&self) -> BigUint {
        BigUint::from(self.num)
    }

    pub fn den_big(&self) -> BigUint {
        BigUint::from(self.den)
    }

    pub fn recip(self) -> Rational {
        Rational::new(self.den, self.num)
    }

    /// Compares `self` with the integer `n` without overflow.
    pub fn cmp_int(&self, n: u128) -> Ordering {
        (BigUint::from(n) * self.den_big()).cmp(&self.num_big()).reverse()
    }
}

impl Mul for Rational {
    type Output = Rational;

    fn mul(self, other: Rational) -> Rational {
        let a = Rational::new(self.num, other.den);
        let b = Rational::new(other.num, self.den);
        Rational::new(a.num * b.num, a.den * b.den)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num_big() * other.den_big()).cmp(&(other.num_big() * self.den_big()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = LabError;

    /// Accepts `n`, `n/d` or a finite decimal such as `1.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LabError::InvalidArgument(format!("cannot parse rational `{s}`"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: u128 = n.trim().parse().map_err(|_| bad())?;
            let d: u128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Rational::new(n, d));
        }
        if let Some((whole, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 30 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let whole: u128 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
            let den = 10u128.pow(frac.len() as u32);
            let frac: u128 = frac.parse().map_err(|_| bad())?;
            return Ok(Rational::new(whole * den + frac, den));
        }
        s.parse::<u128>().map(Rational::integer).map_err(|_| bad())
    }
}

impl Rational {
    /// Reduces `num / den`; `None` when the reduced terms do not fit in 128 bits.
    pub fn from_big(num: &BigUint, den: &BigUint) -> Option<Rational> {
        assert!(*den != BigUint::ZERO, "zero denominator");
        let g = num.gcd(den);
        let (n, d) = (num / &g, den / &g);
        Some(Rational { num: u128::try_from(&n).ok()?, den: u128::try_from(&d).ok()? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!("5/4".parse::<Rational>().unwrap(), Rational::new(5, 4));
        assert_eq!("1.25".parse::<Rational>().unwrap(), Rational::new(5, 4));
        assert_eq!("3".parse::<Rational>().unwrap(), Rational::integer(3));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }

    #[test]
    fn ordering_is_exact() {
        assert!(Rational::new(1, 3) < Rational::new(334, 1000));
        assert_eq!(Rational::new(2, 4), Rational::new(1, 2));
        assert_eq!(Rational::new(7, 2).cmp_int(3), Ordering::Greater);
        assert_eq!(Rational::new(6, 2).cmp_int(3), Ordering::Equal);
    }
}
