use rand::Rng;
use slowmix::arithmetic::TranslationVector;
use slowmix::ceiling::{CeilingFunction, Regime};
use slowmix::dynamics::{reparam_ode_advance, section_map, FlowEngine, FlowPoint, FlowTime, TorusPoint};
use slowmix::numeric::rng::stream;
use slowmix::presets;
use slowmix::spectral::sample_mu;
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

#[test]
fn semigroup_on_random_triples() {
    let (tv, cf) = desk();
    let eng = FlowEngine::new(cf, tv).unwrap();
    let mut rng = stream(11, 0);
    for _ in 0..100 {
        let p = sample_mu(&eng, &mut rng);
        let s = rng.random_range(-500.0..500.0);
        let t = rng.random_range(-500.0..500.0);
        let a = eng.advance(eng.advance(p, s).unwrap(), t).unwrap();
        let b = eng.advance(p, s + t).unwrap();
        assert!(eng.distance(a, b) <= 1e-9, "s={s} t={t}");
    }
}

#[test]
fn unit_ceiling_rational_return_is_identity() {
    let tv = TranslationVector::from_u64(&[0, 3, 7, 15], &[0, 2, 5], 128).unwrap();
    let eng = FlowEngine::new(&CeilingFunction::constant_one(Regime::exponential()), &tv).unwrap();
    // α = 0.[3,7,15] has denominator 333; α′ = [0;2,5] has 11.
    let p = FlowPoint { base: TorusPoint::from_f64(0.3, 0.6), s: 0.25 };
    let q = eng.advance_time(p, FlowTime::from_int(333 * 11)).unwrap();
    assert_eq!(eng.distance(p, q), 0.0);
}

#[test]
fn ode_matches_special_flow() {
    let (tv, cf) = desk();
    let eng = FlowEngine::new(cf, tv).unwrap();
    let mut rng = stream(12, 0);
    for _ in 0..5 {
        let p = sample_mu(&eng, &mut rng);
        let t = rng.random_range(1.0..30.0);
        let (v, _) = reparam_ode_advance(section_map(p, &eng), t, &eng, 1e-11).unwrap();
        let w = section_map(eng.advance(p, t).unwrap(), &eng);
        assert!(v.dist(w) <= 1e-6, "t={t}: {v:?} vs {w:?}");
    }
}

#[test]
fn boxes_keep_their_measure() {
    let (tv, cf) = desk();
    let eng = FlowEngine::new(cf, tv).unwrap();
    let mut rng = stream(13, 0);
    let pts: Vec<FlowPoint> = (0..4000).map(|_| sample_mu(&eng, &mut rng)).collect();
    let t = 17.5;
    let moved: Vec<FlowPoint> = pts.iter().map(|&p| eng.advance(p, t).unwrap()).collect();
    for b in 0..4 {
        let (x0, y0, s0) = (0.2 * b as f64, 0.1 + 0.2 * b as f64, 0.1 * b as f64);
        let inside = |p: &FlowPoint| {
            let (x, y) = p.base.to_f64();
            (x0..x0 + 0.5).contains(&x) && (y0..y0 + 0.5).contains(&y) && (s0..s0 + 0.5).contains(&p.s)
        };
        let before = pts.iter().filter(|p| inside(p)).count() as f64 / pts.len() as f64;
        let after = moved.iter().filter(|p| inside(p)).count() as f64 / pts.len() as f64;
        let se = (before * (1.0 - before) / pts.len() as f64).sqrt();
        assert!((before - after).abs() <= 3.0 * 2f64.sqrt() * se, "box {b}: {before} vs {after}");
    }
}
