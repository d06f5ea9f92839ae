use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use slowmix::arithmetic::{build_liouville_pair, convergents, nearest_int_distance, Axis, Growth, GrowthPolicy, PartialQuotients, TranslationVector};

/// `[a₀; a₁, …, aₙ]` evaluated from the tail.
fn fold_back(a: &[u64]) -> BigRational {
    let mut v = BigRational::from_integer(BigInt::from(*a.last().unwrap()));
    for &x in a[..a.len() - 1].iter().rev() {
        v = BigRational::from_integer(BigInt::from(x)) + v.recip();
    }
    v
}

#[test]
fn golden_denominators_are_fibonacci() {
    let tv = TranslationVector::from_u64(&[0; 1].iter().chain(&[1; 30]).copied().collect::<Vec<_>>(), &[0, 2, 2, 2], 256).unwrap();
    let (mut f0, mut f1) = (BigInt::one(), BigInt::one());
    for n in 1..=30 {
        assert_eq!(tv.q(n), Some(&f1), "n={n}");
        assert_eq!(tv.p(n), Some(&f0), "n={n}");
        let f2 = &f0 + &f1;
        f0 = std::mem::replace(&mut f1, f2);
    }
    let (a, _) = tv.alpha_f64();
    assert!((a - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn convergents_match_folded_fractions(a0 in 0u64..5, tail in prop::collection::vec(1u64..=50, 1..20)) {
        let mut a = vec![a0];
        a.extend(tail);
        let t = convergents(&PartialQuotients::from_u64(&a).unwrap()).unwrap();
        for n in 0..a.len() {
            let (p, q) = (t.p(n).unwrap(), t.q(n).unwrap());
            prop_assert_eq!(BigRational::new(p.clone(), q.clone()), fold_back(&a[..=n]));
            prop_assert!(p.gcd(q).is_one());
            if n > 0 {
                let det = p * t.q(n - 1).unwrap() - t.p(n - 1).unwrap() * q;
                let sign = if n % 2 == 1 { 1 } else { -1 };
                prop_assert_eq!(det, BigInt::from(sign));
            }
        }
    }

    #[test]
    fn convergent_error_is_bracketed(tail in prop::collection::vec(1u64..=50, 3..20)) {
        let mut a = vec![0];
        a.extend(tail);
        let t = convergents(&PartialQuotients::from_u64(&a).unwrap()).unwrap();
        let alpha = t.value();
        // 1/(q(q + q_next)) ≤ |||qα||| ≤ 1/q_next, except at the last row.
        for n in 1..a.len() - 1 {
            let q = t.q(n).unwrap();
            let qn = t.q(n + 1).unwrap();
            let d = nearest_int_distance(&(&alpha * BigRational::from_integer(q.clone())));
            prop_assert!(d <= BigRational::new(BigInt::one(), qn.clone()));
            prop_assert!(d >= BigRational::new(BigInt::one(), q + qn));
        }
    }
}

#[test]
fn relaxed_cubic_growth_is_realized() {
    let tv = build_liouville_pair(&GrowthPolicy::relaxed(Growth::cubic(), 4), 256).unwrap();
    for n in 1..=4 {
        let q = tv.q(n).unwrap();
        let qp = tv.qp(n).unwrap();
        let q_next = tv.q(n + 1).unwrap();
        assert!(qp >= &q.pow(3u32), "q'{n} < q{n}^3");
        assert!(q_next >= &qp.pow(3u32), "q{} < q'{n}^3", n + 1);
    }
    assert!(tv.growth_holds());
}

#[test]
fn rotation_residues_are_exact() {
    let tv = build_liouville_pair(&GrowthPolicy::relaxed(Growth::cubic(), 2), 256).unwrap();
    let rot = tv.rotation(Axis::X);
    let alpha = tv.exact(Axis::X);
    for k in [1i64, 7, -13, 1 << 40] {
        let kb = BigInt::from(k);
        let r = rot.residue(&kb);
        let exact = alpha * BigRational::from_integer(kb);
        let frac = &exact - BigRational::from_integer(exact.floor().to_integer());
        let turns = rot.turns(&r);
        let want: f64 = num_traits::ToPrimitive::to_f64(&frac).unwrap();
        assert!((turns.rem_euclid(1.0) - want).abs() < 1e-15, "k={k}");
        assert!(!frac.is_zero() || turns == 0.0);
    }
}
