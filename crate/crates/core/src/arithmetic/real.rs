//! Binary floating-point values of finite continued fractions.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cf::ConvergentTable;
use crate::error::{Error, Result};

/// `mantissa · 2^exponent`, correctly rounded (to nearest) from an exact
/// rational at `bits` significant bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HighPrecReal {
    pub mantissa: BigInt,
    pub exponent: i64,
    pub bits: u64,
    /// True when no rounding took place.
    pub exact: bool,
}

impl HighPrecReal {
    /// Rounds `r` to `bits` significant bits.
    pub fn from_rational(r: &BigRational, bits: u64) -> Result<Self> {
        if bits < 64 {
            return Err(Error::InvalidInput(format!("precision {bits} below 64 bits")));
        }
        if r.is_zero() {
            return Ok(Self { mantissa: BigInt::zero(), exponent: 0, bits, exact: true });
        }
        let neg = r.is_negative();
        let (num, den) = (r.numer().abs(), r.denom().clone());
        // Choose e with 2^(bits−1) ≤ |r|·2^(−e) < 2^bits.
        let mut e = num.bits() as i64 - den.bits() as i64 - bits as i64;
        let scaled = |e: i64| -> (BigInt, BigInt) {
            if e >= 0 {
                (num.clone(), &den << (e as u64))
            } else {
                (&num << ((-e) as u64), den.clone())
            }
        };
        let (mut n, mut d) = scaled(e);
        let lo = BigInt::one() << (bits - 1);
        while n.div_floor(&d) < lo {
            e -= 1;
            let s = scaled(e);
            n = s.0;
            d = s.1;
        }
        let hi = BigInt::one() << bits;
        while n.div_floor(&d) >= hi {
            e += 1;
            let s = scaled(e);
            n = s.0;
            d = s.1;
        }
        let (q, rem) = n.div_rem(&d);
        let twice = &rem * 2;
        let mut m = q;
        if twice > d || (twice == d && m.is_odd()) {
            m += 1;
        }
        let exact = rem.is_zero();
        if m.bits() > bits {
            m >>= 1;
            e += 1;
        }
        if neg {
            m = -m;
        }
        let mut out = Self { mantissa: m, exponent: e, bits, exact };
        out.normalize();
        Ok(out)
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        while self.mantissa.is_even() {
            self.mantissa >>= 1;
            self.exponent += 1;
        }
    }

    /// The represented dyadic rational.
    pub fn to_rational(&self) -> BigRational {
        dyadic(&self.mantissa, self.exponent)
    }

    /// Outward-rounded enclosure of the source value: one unit in the last
    /// place on either side (exact values return a degenerate interval).
    pub fn enclosure(&self) -> (BigRational, BigRational) {
        let v = self.to_rational();
        if self.exact {
            return (v.clone(), v);
        }
        let mag = if self.mantissa.is_zero() { 0 } else { self.mantissa.bits() as i64 + self.exponent };
        let ulp = dyadic(&BigInt::one(), mag - self.bits as i64);
        (&v - &ulp, &v + &ulp)
    }

    pub fn to_f64(&self) -> f64 {
        let shift = self.mantissa.bits().saturating_sub(60);
        let top = (&self.mantissa >> shift).to_f64().unwrap_or(0.0);
        top * 2f64.powi((self.exponent + shift as i64) as i32)
    }

    /// Decimal digits `d.ddd…e±x` truncated to `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        decimal_string(&self.to_rational(), digits)
    }
}

fn dyadic(m: &BigInt, e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(m << (e as u64))
    } else {
        BigRational::new(m.clone(), BigInt::one() << ((-e) as u64))
    }
}

/// Scientific decimal representation of an exact rational, truncated.
pub fn decimal_string(r: &BigRational, digits: usize) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let r = r.abs();
    let ten = BigInt::from(10);
    // Find exponent x with 10^x ≤ r < 10^(x+1).
    let mut x: i64 = (r.numer().bits() as i64 - r.denom().bits() as i64) * 30103 / 100000;
    let pow = |x: i64| -> BigRational {
        if x >= 0 {
            BigRational::from_integer(num_traits::pow(ten.clone(), x as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-x) as usize))
        }
    };
    while pow(x) > r {
        x -= 1;
    }
    while pow(x + 1) <= r {
        x += 1;
    }
    let scaled = &r / pow(x - digits as i64 + 1);
    let ds = scaled.floor().to_integer().to_str_radix(10);
    let (head, tail) = ds.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{x}")
    } else {
        format!("{sign}{head}.{tail}e{x}")
    }
}

/// Value of the finite continued fraction behind `table`, rounded to `bits`.
pub fn real_value(table: &ConvergentTable, bits: u64) -> Result<HighPrecReal> {
    if table.is_empty() {
        return Err(Error::InvalidInput("empty convergent table".into()));
    }
    HighPrecReal::from_rational(&table.value(), bits)
}

impl std::fmt::Display for HighPrecReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.mantissa.sign() == Sign::Minus { "-" } else { "" };
        write!(f, "{sign}{}p{}", self.mantissa.abs().to_str_radix(16), self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::cf::{convergents, PartialQuotients};

    fn table(a: &[u64]) -> ConvergentTable {
        convergents(&PartialQuotients::from_u64(a).unwrap()).unwrap()
    }

    #[test]
    fn one_half_is_exact() {
        let v = real_value(&table(&[0, 2]), 64).unwrap();
        assert!(v.exact);
        assert_eq!(v.to_rational(), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn five_twelfths_rounds_and_encloses() {
        let v = real_value(&table(&[0, 2, 2, 2]), 128).unwrap();
        let exact = BigRational::new(5.into(), 12.into());
        let (lo, hi) = v.enclosure();
        assert!(lo < exact && exact < hi);
        assert!((v.to_f64() - 5.0 / 12.0).abs() < 1e-17);
    }

    #[test]
    fn golden_twenty_terms() {
        let mut a = vec![0u64];
        a.extend(std::iter::repeat_n(1, 20));
        let v = real_value(&table(&a), 200).unwrap();
        // (√5 − 1)/2 to 30 digits, from an independent high-precision evaluation.
        let g = BigRational::new(
            "618033988749894848204586834366".parse().unwrap(),
            num_traits::pow(BigInt::from(10), 30),
        );
        let diff = (v.to_rational() - g).abs();
        assert!(diff < BigRational::new(1.into(), 100_000_000.into()));
    }

    #[test]
    fn low_precision_rejected() {
        assert!(real_value(&table(&[0, 2]), 32).is_err());
    }

    #[test]
    fn decimal_rendering() {
        let r = BigRational::new(5.into(), 12.into());
        assert_eq!(decimal_string(&r, 5), "4.1666e-1");
        assert_eq!(decimal_string(&BigRational::from_integer(8104.into()), 4), "8.104e3");
    }
}
