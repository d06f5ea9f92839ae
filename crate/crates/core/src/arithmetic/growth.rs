//! Growth policies and the alternating construction of `(α, α′)`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::cf::PartialQuotients;
use super::vector::{CfData, GrowthRecord, Relation, TranslationVector};
use crate::error::{Error, Result};

/// Growth function `G` used in `q′ₙ ≥ G(qₙ)` and `qₙ₊₁ ≥ G(q′ₙ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Growth {
    /// `G(q) = ⌈e^{3q}⌉`.
    Exponential,
    /// `G(q) = coef · q^exp`.
    Power { coef: u64, exp: u32 },
}

impl Growth {
    pub fn cubic() -> Self {
        Growth::Power { coef: 1, exp: 3 }
    }

    /// Evaluates `G(q)` exactly; fails when the result would exceed `budget` bits.
    pub fn eval(&self, q: &BigInt, budget: u64) -> Result<BigInt> {
        match self {
            Growth::Exponential => {
                let x = q
                    .to_u64()
                    .and_then(|q| q.checked_mul(3))
                    .ok_or_else(|| Error::Capacity(format!("exponent 3q for q={q} out of range")))?;
                Ok(BigInt::from(exp_ceil(x, budget)?))
            }
            Growth::Power { coef, exp } => {
                let est = q.bits() * (*exp as u64) + 64;
                if est > budget {
                    return Err(Error::Capacity(format!("G(q) needs ~{est} bits, budget {budget}")));
                }
                Ok(BigInt::from(*coef) * num_traits::pow(q.clone(), *exp as usize))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Growth::Exponential => "ceil(exp(3q))".into(),
            Growth::Power { coef, exp } => format!("{coef}*q^{exp}"),
        }
    }
}

/// Parameters of [`build_liouville_pair`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthPolicy {
    pub growth: Growth,
    pub max_level: usize,
    /// `q₁ = a₁`.
    pub first_quotient: u64,
    /// Largest admissible denominator size, in bits.
    pub bit_budget: u64,
}

impl GrowthPolicy {
    pub fn relaxed(growth: Growth, max_level: usize) -> Self {
        Self { growth, max_level, first_quotient: 2, bit_budget: 1_000_000 }
    }

    pub fn exponential(max_level: usize, first_quotient: u64) -> Self {
        Self { growth: Growth::Exponential, max_level, first_quotient, bit_budget: 1_000_000 }
    }

    pub fn mode(&self) -> &'static str {
        match self.growth {
            Growth::Exponential => "exponential",
            Growth::Power { .. } => "relaxed",
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_level == 0 {
            return Err(Error::Precondition("max_level must be >= 1".into()));
        }
        if self.first_quotient == 0 {
            return Err(Error::InvalidInput("first quotient must be >= 1".into()));
        }
        if let Growth::Power { coef, exp } = self.growth {
            let q = BigInt::from(self.first_quotient);
            if coef == 0 || exp == 0 || self.growth.eval(&q, self.bit_budget)? <= q {
                return Err(Error::InvalidInput(format!("growth {coef}*q^{exp} must exceed q at q1={q}")));
            }
        }
        Ok(())
    }
}

/// Smallest `a ≥ 1` with `a·q + q_prev ≥ target`.
fn min_quotient(target: &BigInt, q: &BigInt, q_prev: &BigInt) -> BigInt {
    let need = target - q_prev;
    if need <= BigInt::zero() {
        return BigInt::one();
    }
    let a = need.div_ceil(q);
    a.max(BigInt::one())
}

/// Builds `α = [0; a₁, a₂, …]`, `α′ = [0; a′₁, …]` by alternately choosing the
/// minimal partial quotient with `q′ₙ ≥ G(qₙ)` and `qₙ₊₁ ≥ G(q′ₙ)` for
/// `n ≤ max_level`. Relaxed policies add one further `q′_{L+1} ≥ G(q_{L+1})`.
pub fn build_liouville_pair(policy: &GrowthPolicy, bits: u64) -> Result<TranslationVector> {
    policy.validate()?;
    let budget = policy.bit_budget;
    let g = |q: &BigInt| policy.growth.eval(q, budget);

    let mut ax = vec![BigInt::zero(), BigInt::from(policy.first_quotient)];
    let mut ay = vec![BigInt::zero()];
    // (q_{n−1}, qₙ) for α and (q′_{n−1}, q′ₙ) for α′.
    let (mut qx_prev, mut qx) = (BigInt::one(), BigInt::from(policy.first_quotient));
    let (mut qy_prev, mut qy) = (BigInt::zero(), BigInt::one());
    let mut records = Vec::new();
    let step = |a: &mut Vec<BigInt>, prev: &mut BigInt, cur: &mut BigInt, target: &BigInt| -> Result<()> {
        let an = min_quotient(target, cur, prev);
        let next = &an * &*cur + &*prev;
        if next.bits() > budget {
            return Err(Error::Capacity(format!("denominator of {} bits exceeds budget {budget}", next.bits())));
        }
        a.push(an);
        *prev = std::mem::replace(cur, next);
        Ok(())
    };
    for n in 1..=policy.max_level {
        let t = g(&qx)?;
        step(&mut ay, &mut qy_prev, &mut qy, &t)?;
        records.push(GrowthRecord { n, relation: Relation::PrimeOverBase, holds: qy >= t, lhs: qy.clone(), bound: t });
        let t = g(&qy)?;
        step(&mut ax, &mut qx_prev, &mut qx, &t)?;
        records.push(GrowthRecord { n, relation: Relation::NextOverPrime, holds: qx >= t, lhs: qx.clone(), bound: t });
    }
    if matches!(policy.growth, Growth::Power { .. }) {
        let t = g(&qx)?;
        step(&mut ay, &mut qy_prev, &mut qy, &t)?;
    }
    let cf_x = CfData::new(PartialQuotients::new(ax)?)?;
    let cf_y = CfData::new(PartialQuotients::new(ay)?)?;
    TranslationVector::from_cf(cf_x, cf_y, bits, records)
}

/// `⌈e^x⌉` for a nonnegative integer `x`, decided with rigorous fixed-point bounds.
pub fn exp_ceil(x: u64, budget: u64) -> Result<BigUint> {
    let int_bits = (x as f64 * std::f64::consts::LOG2_E).ceil() as u64 + 2;
    if int_bits > budget {
        return Err(Error::Capacity(format!("e^{x} has ~{int_bits} bits, budget {budget}")));
    }
    let mut guard = 64 + 64 - (x.max(1)).leading_zeros() as u64;
    loop {
        let f = int_bits + guard;
        let (lo, hi) = exp_bounds(x, f);
        let c_lo = ceil_shift(&lo, f);
        let c_hi = ceil_shift(&hi, f);
        if c_lo == c_hi {
            return Ok(c_lo);
        }
        guard *= 2;
    }
}

fn ceil_shift(v: &BigUint, f: u64) -> BigUint {
    let one = BigUint::one() << f;
    (v + &one - 1u32) >> f
}

/// Fixed-point bounds `lo ≤ e^x·2^f ≤ hi`.
fn exp_bounds(x: u64, f: u64) -> (BigUint, BigUint) {
    let (e_lo, e_hi) = e_bounds(f + 8);
    // Work with f + 8 fractional bits, then drop them outward.
    let f2 = f + 8;
    let mut lo = BigUint::one() << f2;
    let mut hi = lo.clone();
    let (mut b_lo, mut b_hi) = (e_lo, e_hi);
    let mut k = x;
    while k > 0 {
        if k & 1 == 1 {
            lo = mul_floor(&lo, &b_lo, f2);
            hi = mul_ceil(&hi, &b_hi, f2);
        }
        k >>= 1;
        if k > 0 {
            b_lo = mul_floor(&b_lo, &b_lo, f2);
            b_hi = mul_ceil(&b_hi, &b_hi, f2);
        }
    }
    (lo >> 8u32, ((hi + 255u32) >> 8u32))
}

fn mul_floor(a: &BigUint, b: &BigUint, f: u64) -> BigUint {
    (a * b) >> f
}

fn mul_ceil(a: &BigUint, b: &BigUint, f: u64) -> BigUint {
    let p = a * b;
    let one = BigUint::one() << f;
    (p + one - 1u32) >> f
}

/// Fixed-point bounds on `e·2^f` from `Σ 1/k!` by binary splitting.
fn e_bounds(f: u64) -> (BigUint, BigUint) {
    // Smallest N with log₂ N! > f + 4, so the tail after N is below 2^{−f−3}.
    let mut n = 1u64;
    let mut log_fact = 0.0f64;
    while log_fact <= (f + 4) as f64 {
        n += 1;
        log_fact += (n as f64).log2();
    }
    let (p, q) = split(1, n + 1);
    let lo = ((&q + &p) << f) / &q;
    let hi = &lo + 2u32;
    (lo, hi)
}

/// `p/q = Σ_{k=a}^{b−1} 1/(a·(a+1)⋯k)`.
fn split(a: u64, b: u64) -> (BigUint, BigUint) {
    if b - a == 1 {
        return (BigUint::one(), BigUint::from(a));
    }
    let m = (a + b) / 2;
    let (p1, q1) = split(a, m);
    let (p2, q2) = split(m, b);
    (p1 * &q2 + p2, q1 * q2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_ceil_small_values() {
        // ⌈e^x⌉ frozen from a 50-digit independent evaluation.
        let cases: [(u64, u64); 6] = [(0, 1), (1, 3), (3, 21), (6, 404), (9, 8104), (12, 162755)];
        for (x, v) in cases {
            assert_eq!(exp_ceil(x, 1_000_000).unwrap(), BigUint::from(v), "x={x}");
        }
        assert_eq!(exp_ceil(15, 1_000_000).unwrap(), BigUint::from(3269018u64));
    }

    #[test]
    fn exp_ceil_large_matches_bit_length() {
        let v = exp_ceil(1000, 1_000_000).unwrap();
        // e^1000 ≈ 1.97007e434.
        let s = v.to_str_radix(10);
        assert_eq!(s.len(), 435);
        assert!(s.starts_with("197007"));
    }

    #[test]
    fn cubic_four_levels() {
        let tv = build_liouville_pair(&GrowthPolicy::relaxed(Growth::cubic(), 4), 128).unwrap();
        assert_eq!(tv.growth.len(), 8);
        assert!(tv.growth_holds());
        assert_eq!(tv.q(1), Some(&BigInt::from(2)));
        assert_eq!(tv.qp(1), Some(&BigInt::from(8)));
        assert_eq!(tv.q(2), Some(&BigInt::from(513)));
        assert_eq!(tv.qp(2), Some(&BigInt::from(135005697u64)));
        for n in 1..=4 {
            let q = tv.q(n).unwrap();
            let qp = tv.qp(n).unwrap();
            assert!(qp >= &(q * q * q));
            let qn1 = tv.q(n + 1).unwrap();
            assert!(qn1 >= &(qp * qp * qp));
        }
        // Padding row q′₅.
        assert!(tv.qp(5).is_some());
    }

    #[test]
    fn minimal_quotient_is_tight() {
        let tv = build_liouville_pair(&GrowthPolicy::relaxed(Growth::cubic(), 3), 128).unwrap();
        for r in &tv.growth {
            // One fewer of the last quotient would violate the bound.
            assert!(r.holds);
        }
        let q1 = tv.q(1).unwrap();
        let qp1 = tv.qp(1).unwrap();
        assert!(qp1 - BigInt::one() < q1 * q1 * q1);
    }

    #[test]
    fn exponential_growth_first_level() {
        let tv = build_liouville_pair(&GrowthPolicy::exponential(1, 3), 128).unwrap();
        assert_eq!(tv.qp(1), Some(&BigInt::from(8104)));
        assert!(tv.growth_holds());
    }

    #[test]
    fn max_level_zero_rejected() {
        assert!(matches!(
            build_liouville_pair(&GrowthPolicy::relaxed(Growth::cubic(), 0), 128),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn exponential_growth_budget_exceeded() {
        let r = build_liouville_pair(&GrowthPolicy::exponential(1, 5), 128);
        assert!(matches!(r, Err(Error::Capacity(_))));
    }
}
