//! Continued fractions: partial quotients, convergent tables and the distance
//! to the nearest integer.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Partial quotients `[a₀; a₁, a₂, …]` of a finite continued fraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialQuotients {
    a: Vec<BigInt>,
}

impl PartialQuotients {
    /// Validates `aᵢ ≥ 1` for `i ≥ 1` and a nonempty list.
    pub fn new(a: Vec<BigInt>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("empty partial quotient list".into()));
        }
        if let Some((i, _)) = a.iter().enumerate().skip(1).find(|(_, x)| !x.is_positive()) {
            return Err(Error::InvalidInput(format!("partial quotient a{i} must be >= 1")));
        }
        Ok(Self { a })
    }

    pub fn from_u64(a: &[u64]) -> Result<Self> {
        Self::new(a.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn as_slice(&self) -> &[BigInt] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Appends a partial quotient (must be ≥ 1).
    pub fn push(&mut self, x: BigInt) -> Result<()> {
        if !x.is_positive() {
            return Err(Error::InvalidInput("appended partial quotient must be >= 1".into()));
        }
        self.a.push(x);
        Ok(())
    }
}

/// One row `(n, pₙ, qₙ)` of a convergent table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentRow {
    pub n: usize,
    pub p: BigInt,
    pub q: BigInt,
}

/// Convergents `pₙ/qₙ` of a finite continued fraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentTable {
    pub rows: Vec<ConvergentRow>,
}

impl ConvergentTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> &ConvergentRow {
        self.rows.last().expect("convergent tables are nonempty")
    }

    pub fn q(&self, n: usize) -> Option<&BigInt> {
        self.rows.get(n).map(|r| &r.q)
    }

    pub fn p(&self, n: usize) -> Option<&BigInt> {
        self.rows.get(n).map(|r| &r.p)
    }

    /// The exact value `p_N/q_N` of the last row.
    pub fn value(&self) -> BigRational {
        let r = self.last();
        BigRational::new(r.p.clone(), r.q.clone())
    }

    /// Checks the recurrences against `pq`, coprimality and monotonicity of `qₙ`.
    /// Returns the first failing index with a description.
    pub fn check_recurrences(&self, pq: &PartialQuotients) -> std::result::Result<(), (usize, String)> {
        let fresh = convergents(pq).map_err(|e| (0, e.to_string()))?;
        if fresh.len() != self.len() {
            return Err((0, format!("table has {} rows, quotients give {}", self.len(), fresh.len())));
        }
        for (i, (a, b)) in self.rows.iter().zip(&fresh.rows).enumerate() {
            if a != b {
                return Err((i, "recurrence mismatch".into()));
            }
            if !a.p.gcd(&a.q).is_one() {
                return Err((i, "pₙ and qₙ not coprime".into()));
            }
            if i >= 2 && self.rows[i].q <= self.rows[i - 1].q {
                return Err((i, "qₙ not strictly increasing".into()));
            }
        }
        Ok(())
    }
}

/// Convergent table from the standard recurrence with seeds
/// `p₀ = a₀, p₁ = a₀a₁ + 1, q₀ = 1, q₁ = a₁`.
pub fn convergents(pq: &PartialQuotients) -> Result<ConvergentTable> {
    let a = pq.as_slice();
    if a.is_empty() {
        return Err(Error::InvalidInput("empty partial quotient list".into()));
    }
    let mut rows = Vec::with_capacity(a.len());
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (a[0].clone(), BigInt::one());
    rows.push(ConvergentRow { n: 0, p: p.clone(), q: q.clone() });
    for (n, an) in a.iter().enumerate().skip(1) {
        let p_next = an * &p + &p_prev;
        let q_next = an * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        rows.push(ConvergentRow { n, p: p.clone(), q: q.clone() });
    }
    Ok(ConvergentTable { rows })
}

/// `min_{m ∈ ℤ} |u − m|` for an exact rational.
pub fn nearest_int_distance(u: &BigRational) -> BigRational {
    let f = u - u.floor();
    let g = BigRational::one() - &f;
    if f <= g {
        f
    } else {
        g
    }
}

/// `min_{m ∈ ℤ} |u − m|` in double precision.
pub fn nearest_int_distance_f64(u: f64) -> f64 {
    (u - u.round()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(t: &ConvergentTable) -> Vec<i64> {
        t.rows.iter().map(|r| i64::try_from(&r.q).unwrap()).collect()
    }

    #[test]
    fn golden_denominators() {
        let t = convergents(&PartialQuotients::from_u64(&[0, 1, 1, 1, 1]).unwrap()).unwrap();
        assert_eq!(qs(&t), vec![1, 1, 2, 3, 5]);
    }

    #[test]
    fn single_quotient_seed() {
        let t = convergents(&PartialQuotients::from_u64(&[3]).unwrap()).unwrap();
        assert_eq!(t.rows[0].p, BigInt::from(3));
        assert_eq!(t.rows[0].q, BigInt::from(1));
    }

    #[test]
    fn two_two_two() {
        let t = convergents(&PartialQuotients::from_u64(&[0, 2, 2, 2]).unwrap()).unwrap();
        let pq: Vec<(i64, i64)> = t
            .rows
            .iter()
            .map(|r| (i64::try_from(&r.p).unwrap(), i64::try_from(&r.q).unwrap()))
            .collect();
        assert_eq!(pq, vec![(0, 1), (1, 2), (2, 5), (5, 12)]);
    }

    #[test]
    fn empty_and_nonpositive_rejected() {
        assert!(PartialQuotients::new(vec![]).is_err());
        assert!(PartialQuotients::from_u64(&[1, 0]).is_err());
        assert!(PartialQuotients::new(vec![BigInt::from(-2), BigInt::from(1)]).is_ok());
    }

    #[test]
    fn nearest_integer_examples() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(nearest_int_distance(&r(2, 5)), r(2, 5));
        assert_eq!(nearest_int_distance(&r(3, 5)), r(2, 5));
        assert_eq!(nearest_int_distance(&r(5, 4)), r(1, 4));
        assert_eq!(nearest_int_distance(&r(-5, 4)), r(1, 4));
        assert!((nearest_int_distance_f64(0.6) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn recurrence_check_detects_corruption() {
        let pq = PartialQuotients::from_u64(&[0, 3, 5, 2, 7]).unwrap();
        let mut t = convergents(&pq).unwrap();
        assert!(t.check_recurrences(&pq).is_ok());
        t.rows[2].q += 1;
        assert_eq!(t.check_recurrences(&pq).unwrap_err().0, 2);
    }
}
