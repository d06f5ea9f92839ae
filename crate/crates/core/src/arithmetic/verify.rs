//! Exact checks of the best-approximation property and of the two-sided
//! convergent bound `1/(qₙ(qₙ+qₙ₊₁)) ≤ (−1)ⁿ(α − pₙ/qₙ) ≤ 1/(qₙqₙ₊₁)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cf::convergents;
use super::real::HighPrecReal;
use super::vector::{Axis, CfData, TranslationVector};
use crate::error::{Error, Result};
use crate::report::{CriterionReport, Status};

/// Default enumeration cap for `k` in the best-approximation scan.
pub const DEFAULT_SCAN_CAP: u64 = 100_000;

/// Checks `|||qₙ₋₁α||| < |||kα|||` for all `1 ≤ k < qₙ`, `k ≠ qₙ₋₁`, for every
/// α in the open interval of infinite continuations of the stored quotients.
///
/// `qₙ₋₁, qₙ` are read from the stored table; the interval for α is rebuilt
/// from the partial quotients. On that interval every `|||kα|||` with
/// `2k < 2q_N + q_{N−1}` is linear, so checking both endpoints decides it.
pub fn best_approx_check(cf: &CfData, n: usize, cap: u64) -> Result<CriterionReport> {
    let last = cf.last_index();
    if n == 0 || n > last {
        return Err(Error::Precondition(format!("row n={n} outside 1..={last}")));
    }
    let q_prev = cf.table.q(n - 1).unwrap().clone();
    let q_n = cf.table.q(n).unwrap().clone();
    let mut rep = CriterionReport::new("best-approximation").param("n", n).param("q_n", &q_n);
    rep.tolerance = 0.0;
    let k_end = q_n.to_u64().filter(|&q| q <= cap.saturating_add(1));
    let Some(k_end) = k_end else {
        // Scan the permitted prefix, then report the capacity overflow.
        let partial = scan(cf, &q_prev, cap + 1)?;
        return Err(Error::Capacity(format!(
            "q_{n} = {q_n} exceeds the enumeration cap {cap}; partial scan of k <= {cap}: {}",
            match partial {
                None => "no violation".to_string(),
                Some(k) => format!("violation at k={k}"),
            }
        )));
    };
    rep.samples = k_end.saturating_sub(1);
    match scan(cf, &q_prev, k_end)? {
        None => {
            rep.margin = 0.0;
            rep.status = Status::Pass;
        }
        Some(k) => {
            rep.margin = -1.0;
            rep.status = Status::Fail;
            rep.witness = Some(format!("k={k}"));
        }
    }
    Ok(rep)
}

/// Returns the first `k < k_end` violating the inequality, if any.
fn scan(cf: &CfData, q_prev: &BigInt, k_end: u64) -> Result<Option<u64>> {
    let fresh = convergents(&cf.quotients)?;
    let last = fresh.last();
    let (pn, qn) = (last.p.clone(), last.q.clone());
    let (pm, qm) = if fresh.len() >= 2 {
        let r = &fresh.rows[fresh.len() - 2];
        (&pn + &r.p, &qn + &r.q)
    } else {
        // α = a₀ exactly; continuations a₀ + 1/x, x > 1, reach up to a₀ + 1.
        (&pn + 1, qn.clone())
    };
    let ends = [(pn, qn), (pm, qm)];
    let fits = ends.iter().all(|(_, q)| q.bits() < 126) && q_prev.bits() < 64;
    if fits {
        let ends: Vec<(u128, u128)> = ends
            .iter()
            .map(|(p, q)| (p.mod_floor(q).to_u128().unwrap(), q.to_u128().unwrap()))
            .collect();
        let kp = q_prev.to_u64().unwrap() as u128;
        let dref: Vec<u128> = ends.iter().map(|&(p, q)| dist_u(super::rotation::mulmod(kp % q, p, q), q)).collect();
        let mut res: Vec<u128> = vec![0; ends.len()];
        for k in 1..k_end {
            let mut all_ge = true;
            let mut any_gt = false;
            for (i, &(p, q)) in ends.iter().enumerate() {
                res[i] += p;
                if res[i] >= q {
                    res[i] -= q;
                }
                let d = dist_u(res[i], q);
                all_ge &= d >= dref[i];
                any_gt |= d > dref[i];
            }
            if k as u128 != kp && !(all_ge && any_gt) {
                return Ok(Some(k));
            }
        }
        return Ok(None);
    }
    let ends: Vec<(BigInt, BigInt)> = ends.iter().map(|(p, q)| (p.mod_floor(q), q.clone())).collect();
    let dref: Vec<BigInt> = ends.iter().map(|(p, q)| dist_b(&(q_prev * p).mod_floor(q), q)).collect();
    let mut res: Vec<BigInt> = vec![BigInt::zero(); ends.len()];
    for k in 1..k_end {
        let mut all_ge = true;
        let mut any_gt = false;
        for (i, (p, q)) in ends.iter().enumerate() {
            res[i] += p;
            if &res[i] >= q {
                res[i] -= q;
            }
            let d = dist_b(&res[i], q);
            all_ge &= d >= dref[i];
            any_gt |= d > dref[i];
        }
        if BigInt::from(k) != *q_prev && !(all_ge && any_gt) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

fn dist_u(r: u128, q: u128) -> u128 {
    r.min(q - r)
}

fn dist_b(r: &BigInt, q: &BigInt) -> BigInt {
    let s = q - r;
    if &s < r {
        s
    } else {
        r.clone()
    }
}

pub fn best_approx_verify(tv: &TranslationVector, axis: Axis, n: usize, cap: u64) -> Result<CriterionReport> {
    let mut r = best_approx_check(tv.cf(axis), n, cap)?;
    r.add_param("axis", axis.as_str());
    Ok(r)
}

/// Two-sided bound at row `n` for the value `alpha`, first with an interval
/// enclosure at `bits` and, when that is undecided, exactly.
pub fn approx_bounds_check(cf: &CfData, alpha: &BigRational, n: usize, bits: u64) -> Result<CriterionReport> {
    let last = cf.last_index();
    if n >= last {
        return Err(Error::Precondition(format!("row n+1={} missing (last row {last})", n + 1)));
    }
    let t = &cf.table;
    let (pn, qn, qn1) = (t.p(n).unwrap(), t.q(n).unwrap(), t.q(n + 1).unwrap());
    let lo_b = BigRational::new(BigInt::one(), qn * (qn + qn1));
    let hi_b = BigRational::new(BigInt::one(), qn * qn1);
    let conv = BigRational::new(pn.clone(), qn.clone());
    let sign = if n.is_multiple_of(2) { BigRational::one() } else { -BigRational::one() };

    let enc = HighPrecReal::from_rational(alpha, bits)?.enclosure();
    let a = (&enc.0 - &conv) * &sign;
    let b = (&enc.1 - &conv) * &sign;
    let (d_lo, d_hi) = if a <= b { (a, b) } else { (b, a) };

    let mut rep = CriterionReport::new("convergent-bounds").param("n", n).param("bits", bits);
    rep.tolerance = 0.0;
    rep.samples = 1;
    let interval = if lo_b <= d_lo && d_hi <= hi_b {
        Status::Pass
    } else if d_hi < lo_b || d_lo > hi_b {
        Status::Fail
    } else {
        Status::Undecided
    };
    let exact_d = (alpha - &conv) * &sign;
    let exact_ok = lo_b <= exact_d && exact_d <= hi_b;
    rep.status = match interval {
        Status::Undecided => {
            rep.add_param("decided_by", "exact");
            if exact_ok {
                Status::Pass
            } else {
                Status::Fail
            }
        }
        s => {
            rep.add_param("decided_by", "interval");
            s
        }
    };
    let rel = |x: BigRational| super::rotation::ratio_f64(&x.numer().abs().to_biguint().unwrap(), &x.denom().to_biguint().unwrap()) * if x.is_negative() { -1.0 } else { 1.0 };
    let m_lo = rel((&exact_d - &lo_b) / &lo_b);
    let m_hi = rel((&hi_b - &exact_d) / &hi_b);
    rep.margin = m_lo.min(m_hi);
    if rep.status == Status::Fail {
        rep.witness = Some(format!("n={n}"));
    }
    Ok(rep)
}

pub fn approx_bounds_verify(tv: &TranslationVector, axis: Axis, n: usize, bits: u64) -> Result<CriterionReport> {
    let mut r = approx_bounds_check(tv.cf(axis), tv.exact(axis), n, bits)?;
    r.add_param("axis", axis.as_str());
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::cf::PartialQuotients;

    fn cf(a: &[u64]) -> CfData {
        CfData::new(PartialQuotients::from_u64(a).unwrap()).unwrap()
    }

    fn golden(len: usize) -> CfData {
        let mut a = vec![0u64];
        a.extend(std::iter::repeat_n(1, len));
        cf(&a)
    }

    /// Independent oracle: exhaustive scan at many sample points of the
    /// continuation interval with exact rationals.
    fn brute(c: &CfData, n: usize) -> Option<u64> {
        let t = &c.table;
        let qp = t.q(n - 1).unwrap().to_u64().unwrap();
        let qn = t.q(n).unwrap().to_u64().unwrap();
        let v = t.value();
        let r = t.rows.len();
        let med = if r >= 2 {
            BigRational::new(&t.last().p + &t.rows[r - 2].p, &t.last().q + &t.rows[r - 2].q)
        } else {
            &v + BigRational::one()
        };
        let dist = |k: u64, a: &BigRational| crate::arithmetic::cf::nearest_int_distance(&(a * BigRational::from_integer(k.into())));
        for j in 1..8 {
            let w = BigRational::new(j.into(), 8.into());
            let a = &v + (&med - &v) * w;
            for k in 1..qn {
                if k != qp && dist(k, &a) <= dist(qp, &a) {
                    return Some(k);
                }
            }
        }
        None
    }

    #[test]
    fn golden_row_four_passes() {
        let c = golden(10);
        let r = best_approx_check(&c, 4, DEFAULT_SCAN_CAP).unwrap();
        assert!(r.passed());
        assert_eq!(brute(&c, 4), None);
    }

    #[test]
    fn row_one_is_vacuous() {
        let r = best_approx_check(&golden(6), 1, DEFAULT_SCAN_CAP).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn corrupted_row_fails_with_witness() {
        let mut c = cf(&[0, 3, 5, 2, 7, 4]);
        c.table.rows[2].q += 1;
        let r = best_approx_check(&c, 3, DEFAULT_SCAN_CAP).unwrap();
        assert_eq!(r.status, Status::Fail);
        assert!(r.witness.is_some());
        assert!(brute(&c, 3).is_some());
    }

    #[test]
    fn matches_brute_force_on_mixed_quotients() {
        let c = cf(&[1, 2, 1, 4, 3, 1, 2, 5]);
        for n in 1..c.table.len() {
            let r = best_approx_check(&c, n, DEFAULT_SCAN_CAP).unwrap();
            assert_eq!(r.passed(), brute(&c, n).is_none(), "n={n}");
        }
    }

    #[test]
    fn capacity_error_beyond_cap() {
        let c = cf(&[0, 1000, 1000]);
        assert!(matches!(best_approx_check(&c, 2, 500), Err(Error::Capacity(_))));
    }

    #[test]
    fn bounds_golden_row_three() {
        let c = golden(10);
        let r = approx_bounds_check(&c, &c.table.value(), 3, 256).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn bounds_equality_at_second_to_last_row() {
        let c = golden(10);
        let r = approx_bounds_check(&c, &c.table.value(), 9, 256).unwrap();
        assert!(r.passed());
        assert!(r.params.iter().any(|(k, v)| k == "decided_by" && v == "exact"));
    }

    #[test]
    fn bounds_last_row_is_precondition_error() {
        let c = golden(10);
        assert!(matches!(approx_bounds_check(&c, &c.table.value(), 10, 256), Err(Error::Precondition(_))));
    }

    #[test]
    fn bounds_detect_swapped_numerators() {
        let mut c = golden(10);
        let alpha = c.table.value();
        let tmp = c.table.rows[4].p.clone();
        c.table.rows[4].p = c.table.rows[5].p.clone();
        c.table.rows[5].p = tmp;
        let r = approx_bounds_check(&c, &alpha, 4, 256).unwrap();
        assert_eq!(r.status, Status::Fail);
    }
}
