use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use slowmix::arithmetic::{Axis, TranslationVector};
use slowmix::ceiling::{CeilingFunction, Regime, SampleOptions};
use slowmix::criteria::*;
use slowmix::dynamics::{birkhoff_polynomial, FlowEngine, FlowPoint, FlowTime, TorusPoint};
use slowmix::numeric::fixed::to_fixed;
use slowmix::presets;
use slowmix::report::Status;
use slowmix::spectral::{FiberBump, Observable};
use slowmix::trig::TrigPolynomial;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn desk() -> &'static (TranslationVector, CeilingFunction) {
    static D: OnceLock<(TranslationVector, CeilingFunction)> = OnceLock::new();
    D.get_or_init(|| {
        let p = presets::desk();
        let tv = p.vector().unwrap();
        let cf = p.ceiling(&tv).unwrap();
        (tv, cf)
    })
}

fn small_opts() -> SampleOptions {
    SampleOptions { grid: 500, random: 500, seed: 9 }
}

/// `sin(πu)` with `u` reduced exactly to `[−½, ½]` first.
fn sin_pi(u: &BigRational) -> f64 {
    let n = u.round();
    let r = (u - &n).to_f64().unwrap();
    if (n.to_integer() % BigInt::from(2)) != BigInt::zero() { -(PI * r).sin() } else { (PI * r).sin() }
}

fn rat(q: &BigInt) -> BigRational {
    BigRational::from_integer(q.clone())
}

/// `D_y S_m[A cos(2πqy)] = −2πqA·sin(2π{qy} + πq(m−1)α′)·sin(πqmα′)/sin(πqα′)`.
fn y_slope_oracle(a: f64, q: &BigInt, m: &BigUint, alpha: &BigRational, y: u128) -> f64 {
    let qa = alpha * rat(q);
    let mb = BigInt::from(m.clone());
    let qy = BigRational::new(BigInt::from(y.wrapping_mul(q.to_u128().unwrap())), BigInt::from(1u8) << 128);
    let mid = qy * rat(&BigInt::from(2)) + &qa * rat(&(&mb - 1));
    -2.0 * PI * q.to_f64().unwrap() * a * sin_pi(&mid) * sin_pi(&(&qa * rat(&mb))) / sin_pi(&qa)
}

#[test]
fn y_slope_matches_closed_form() {
    let (tv, cf) = desk();
    let alpha = tv.exact(Axis::Y);
    for l in &cf.levels {
        let spec = MixingBandSpec::y_default(tv, &cf.regime, l.n).unwrap();
        for m in spec.m_samples().into_iter().step_by(5) {
            let d = birkhoff_polynomial(&l.y.lift(1), &m, tv).unwrap().derivative(1, 1);
            let scale = m.to_f64().unwrap() * l.eps_p * 2.0 * PI * l.qp.to_f64().unwrap();
            for i in 0..16 {
                let y = to_fixed((i as f64 + 0.21) / 16.0);
                let got = d.eval(0, y).re;
                let want = y_slope_oracle(l.eps_p, &l.qp, &m, alpha, y);
                assert!((got - want).abs() / scale <= 1e-8, "n={} m={m}: {got} vs {want}", l.n);
            }
        }
    }
}

#[test]
fn desk_stretch_passes_and_unit_ceiling_fails() {
    let (tv, cf) = desk();
    let spec = MixingBandSpec::x_default(tv, &cf.regime, 1).unwrap();
    let rep = stretch_check_x(cf, tv, &spec, &small_opts()).unwrap();
    assert_eq!(rep.status, Status::Pass, "{}", rep.to_text());
    let one = CeilingFunction::constant_one(cf.regime.clone());
    let rep = stretch_check_x(&one, tv, &spec, &small_opts()).unwrap();
    assert_eq!(rep.margin, 0.0);
    assert_eq!(rep.status, Status::Fail);
    let spec = MixingBandSpec::y_default(tv, &cf.regime, 1).unwrap();
    assert_eq!(stretch_check_y(&one, tv, &spec, &small_opts()).unwrap().margin, 0.0);
}

#[test]
fn scpa_band_without_x_levels_is_the_y_residual() {
    let (tv, cf) = desk();
    let mut stripped = cf.clone();
    for l in &mut stripped.levels {
        l.xt = TrigPolynomial::zero(1);
    }
    for n in 1..=2 {
        let full = scpa_band_check(cf, tv, n, &small_opts()).unwrap();
        let bare = scpa_band_check(&stripped, tv, n, &small_opts()).unwrap();
        let y_full: f64 = full.get("y_sup").unwrap().parse().unwrap();
        let sup_bare: f64 = bare.get("sup").unwrap().parse().unwrap();
        assert!((y_full - sup_bare).abs() <= 1e-10, "{y_full} vs {sup_bare}");
        // |S_k[A cos 2πq′y]| ≤ |A·sin(πq′kα′)/sin(πq′α′)| summed over levels.
        let k = tv.q(n).unwrap() * tv.qp(n).unwrap();
        let bound: f64 = cf
            .levels
            .iter()
            .map(|l| {
                let qa = tv.exact(Axis::Y) * rat(&l.qp);
                (l.eps_p * sin_pi(&(&qa * rat(&k))) / sin_pi(&qa)).abs()
            })
            .sum();
        assert!(sup_bare <= bound * (1.0 + 1e-9), "{sup_bare} > {bound}");
    }
}

#[test]
fn unit_ceiling_has_no_band_fluctuation() {
    let (tv, cf) = desk();
    let one = CeilingFunction::constant_one(cf.regime.clone());
    let rep = scpa_band_check(&one, tv, 1, &small_opts()).unwrap();
    assert_eq!(rep.get("sup"), Some("0.0000000000000000e0"));
    assert_eq!(rep.status, Status::Pass);
}

#[test]
fn base_translation_bounds_are_exact() {
    let (tv, cf) = desk();
    let eng = FlowEngine::new(cf, tv).unwrap();
    let rep = displacement_check(&eng, cf, 1, 20, 4).unwrap();
    assert_eq!(rep.get("base_x_bound_holds"), Some("true"));
    assert_eq!(rep.get("base_y_bound_holds"), Some("true"));
    assert_eq!(rep.status, Status::Pass, "{}", rep.to_text());
}

#[test]
fn sequence_examples() {
    let k: Vec<BigUint> = [4u32, 64].iter().map(|&x| BigUint::from(x)).collect();
    let s = singularity_sequence(2.0, &k).unwrap();
    let want: Vec<BigUint> = [4u32, 8, 64, 128, 192, 256].iter().map(|&x| BigUint::from(x)).collect();
    assert_eq!(s, want);
    assert_eq!(singularity_sequence(1.01, &k[..1]).unwrap(), vec![BigUint::from(4u32)]);
}

proptest! {
    #[test]
    fn sequence_is_increasing_with_expected_length(tau in 1.1f64..4.0, k1 in 1u64..1000, slack in prop::collection::vec(0u64..50, 1..5)) {
        let mut k = vec![BigUint::from(k1)];
        for (i, s) in slack.iter().enumerate() {
            let g = tau.powi(i as i32 + 2).ceil() as u64;
            let next = k.last().unwrap() * BigUint::from(g) + BigUint::from(*s);
            k.push(next);
        }
        let seq = singularity_sequence(tau, &k).unwrap();
        prop_assert!(seq.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(seq.len(), terms_through(tau, k.len()));
        let direct: usize = (1..=k.len() as i32).map(|n| tau.powi(n).floor() as usize).sum();
        prop_assert_eq!(seq.len(), direct);
    }
}

/// Unit ceiling, `f = e(x)·χ(s)`, `lᵢ = i·q`: `(1/N)|Σ f(T^{lᵢ}p)| ≥ χ(s)(1 − πNq|||qα|||)`.
#[test]
fn rigid_rotation_oracle() {
    let (tv, _) = desk();
    let eng = FlowEngine::new(&CeilingFunction::constant_one(Regime::exponential()), tv).unwrap();
    let chi = FiberBump::new(0.1, 0.9).unwrap();
    let f = Observable::character([1, 0], chi).unwrap();
    let q = tv.q(2).unwrap().clone();
    let d = slowmix::arithmetic::nearest_int_distance(&(tv.exact(Axis::X) * BigRational::from_integer(q.clone()))).to_f64().unwrap();
    let p = FlowPoint { base: TorusPoint::from_f64(0.3, 0.7), s: 0.5 };
    let n = 50;
    let mut acc = Complex64::zero();
    for i in 1..=n {
        let t = FlowTime::from_int((&q * BigInt::from(i)).to_i128().unwrap());
        acc += f.eval(eng.advance_time(p, t).unwrap());
    }
    let lower = chi.eval(p.s) * (1.0 - PI * n as f64 * q.to_f64().unwrap() * d);
    assert!(acc.norm() / n as f64 >= lower - 1e-12, "{} < {lower}", acc.norm() / n as f64);
    assert!(lower > 0.99 * chi.eval(p.s));
}

#[test]
fn coverage_needs_three_levels() {
    let (tv, cf) = desk();
    let eng = FlowEngine::new(cf, tv).unwrap();
    let rep = coverage_check(&eng, cf, 1000, 1).unwrap();
    assert_eq!(rep.status, Status::InsufficientData);
}

#[test]
fn reports_are_reproducible() {
    let (tv, cf) = desk();
    let a = scpa_band_check(cf, tv, 2, &small_opts()).unwrap();
    let b = scpa_band_check(cf, tv, 2, &small_opts()).unwrap();
    assert_eq!(a.to_text(), b.to_text());
}
