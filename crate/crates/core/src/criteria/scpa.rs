//! Rigidity along the return times `kₙ = qₙq′ₙ`: the band estimate on
//! `S_{kₙ}φ − kₙ`, displacement of `T^{kₙ}` on `𝒞ₙ`, tower overlap and coverage.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use super::stretch::{birkhoff_1d, Eval1};
use crate::arithmetic::cf::nearest_int_distance;
use crate::arithmetic::{Axis, TranslationVector};
use crate::ceiling::verify::{band_samples, lift_unit};
use crate::ceiling::{CeilingFunction, SampleOptions};
use crate::dynamics::{FlowEngine, FlowPoint, FlowTime, TorusPoint};
use crate::error::{Error, Result};
use crate::numeric::fixed::{circ_dist, from_fixed, to_fixed};
use crate::numeric::rng::stream;
use crate::report::{fmt_f64, CriterionReport, Status};
use crate::spectral::sample_mu;
use crate::trig::TrigPolynomial;

/// Parameters of the rigidity criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct SCPASpec {
    pub gamma: f64,
    pub tau: f64,
    /// `k₁, k₂, …` (index 0 is level 1).
    pub k: Vec<BigUint>,
}

impl SCPASpec {
    pub const DEFAULT_GAMMA: f64 = 4.0;
    pub const DEFAULT_TAU: f64 = 3.0;

    /// `kₙ = qₙq′ₙ` for `n = 1, …, levels`.
    pub fn from_vector(tv: &TranslationVector, levels: usize, gamma: f64, tau: f64) -> Result<Self> {
        let k = (1..=levels)
            .map(|n| match (tv.q(n), tv.qp(n)) {
                (Some(q), Some(qp)) => Ok((q * qp).to_biguint().expect("positive denominators")),
                _ => Err(Error::Precondition(format!("level {n} is not tabulated"))),
            })
            .collect::<Result<_>>()?;
        let s = Self { gamma, tau, k };
        s.validate()?;
        Ok(s)
    }

    /// `1 < τ < γ` and `kₙ₊₁ ≥ ⌈γⁿ⌉·kₙ` (exact integer comparison).
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 1.0 && self.gamma > self.tau && self.gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("need 1 < tau < gamma, got tau={} gamma={}", self.tau, self.gamma)));
        }
        for (i, w) in self.k.windows(2).enumerate() {
            let n = i + 1;
            let g = BigUint::from_f64(self.gamma.powi(n as i32).ceil())
                .ok_or_else(|| Error::Capacity(format!("gamma^{n} does not fit an integer")))?;
            if w[1] < &g * &w[0] {
                return Err(Error::InvalidInput(format!("k{} < gamma^{n}·k{n}", n + 1)));
            }
        }
        Ok(())
    }
}

/// `[1/ν², 1/ν − 1/ν²]`.
pub fn scpa_band(nu: f64) -> (f64, f64) {
    (1.0 / (nu * nu), 1.0 / nu - 1.0 / (nu * nu))
}

/// `𝒞ₙ` band `[2/ν², 1/ν − 2/ν²]` in `{qₙx}`.
pub fn c_band(nu: f64) -> (f64, f64) {
    (2.0 / (nu * nu), 1.0 / nu - 2.0 / (nu * nu))
}

fn tabulated(tv: &TranslationVector, n: usize) -> Result<(BigInt, BigInt)> {
    match (tv.q(n), tv.qp(n)) {
        (Some(q), Some(qp)) => Ok((q.clone(), qp.clone())),
        _ => Err(Error::Precondition(format!("level {n} is not tabulated"))),
    }
}

/// Uniform grid of `count` points on `[0, 1)` followed by `extra` random ones.
fn circle_samples(count: usize, extra: usize, seed: u64, id: u64) -> Vec<u128> {
    let mut rng = stream(seed, id);
    (0..count).map(|i| to_fixed(i as f64 / count as f64)).chain((0..extra).map(|_| rng.random())).collect()
}

fn sup_inf(e: &Eval1, xs: &[u128]) -> (f64, f64) {
    xs.par_iter().map(|&x| e.at(x)).fold(|| (f64::NEG_INFINITY, f64::INFINITY), |a, v| (a.0.max(v), a.1.min(v))).reduce(
        || (f64::NEG_INFINITY, f64::INFINITY),
        |a, b| (a.0.max(b.0), a.1.min(b.1)),
    )
}

/// Sup of `|S_{kₙ}φ − kₙ|` over band points `{qₙx} ∈ [1/ν², 1/ν − 1/ν²]` and a
/// `y` grid, against `εₙ`.
///
/// `S_kφ − k = X(x) + Y(y)` separates, so the sup over the product grid is
/// `max(max X + max Y, −(min X + min Y))`.
pub fn scpa_band_check(cf: &CeilingFunction, tv: &TranslationVector, n: usize, opts: &SampleOptions) -> Result<CriterionReport> {
    let (q, qp) = tabulated(tv, n)?;
    let nu = cf.regime.nu(n);
    let k = (&q * &qp).to_biguint().expect("positive denominators");
    let eps = cf.regime.eps(&q);
    let mut rep = CriterionReport::new(format!("scpa.band.n{n}"))
        .param("n", n)
        .param("nu", nu)
        .param("k", &k)
        .param("eps", fmt_f64(eps))
        .param("regime", cf.regime.summary());
    let band = scpa_band(nu);
    let xs: Vec<u128> = band_samples(&q, &[band], opts, 0x5c00 + n as u64).into_iter().map(|p| p.1).collect();
    let ys = circle_samples(opts.grid, opts.random, opts.seed, 0x5c80 + n as u64);

    let (mut own, mut others, mut ysum) = (TrigPolynomial::zero(1), TrigPolynomial::zero(1), TrigPolynomial::zero(1));
    for l in &cf.levels {
        let sx = birkhoff_1d(&l.xt, Axis::X, &k, tv)?;
        if l.n == n {
            own = own.add(&sx)?;
        } else {
            others = others.add(&sx)?;
        }
        ysum = ysum.add(&birkhoff_1d(&l.y, Axis::Y, &k, tv)?)?;
    }
    let xall = Eval1::new(own.add(&others)?);
    let (own, others, ysum) = (Eval1::new(own), Eval1::new(others), Eval1::new(ysum));
    let (xmax, xmin) = sup_inf(&xall, &xs);
    let (ymax, ymin) = sup_inf(&ysum, &ys);
    let (omax, omin) = sup_inf(&own, &xs);
    let (rmax, rmin) = sup_inf(&others, &xs);
    let (xmax, xmin) = if xs.is_empty() { (0.0, 0.0) } else { (xmax, xmin) };
    let total = (xmax + ymax).max(-(xmin + ymin)).max(0.0);
    let y_sup = ymax.max(-ymin).max(0.0);
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    let qpf = qp.to_f64().unwrap_or(f64::INFINITY);
    rep.add_param("sup", fmt_f64(total));
    rep.add_param("own_level_sup", fmt_f64(omax.max(-omin).max(0.0)));
    rep.add_param("own_level_bound", fmt_f64(qf / qpf));
    rep.add_param("other_levels_sup", fmt_f64(rmax.max(-rmin).max(0.0)));
    rep.add_param("other_levels_bound", fmt_f64(2.0 / qpf));
    rep.add_param("y_sup", fmt_f64(y_sup));
    rep.samples = (xs.len() * ys.len()) as u64;
    rep.margin = if total == 0.0 { f64::INFINITY } else { eps / total };
    rep.witness = Some(format!("x_max={} y_max={}", fmt_f64(xmax.max(-xmin)), fmt_f64(y_sup)));
    rep.decide();
    Ok(rep)
}

/// Random points of `𝒞ₙ`: `{qₙx}` in the `𝒞ₙ` band, `y` uniform, `s` uniform in the fiber.
pub fn sample_c_points(eng: &FlowEngine, q: &BigInt, nu: f64, count: usize, seed: u64, id: u64) -> Vec<FlowPoint> {
    let qu = q.to_biguint().expect("positive denominator");
    let (a, b) = c_band(nu);
    let mut rng = stream(seed, id);
    (0..count)
        .map(|_| {
            let u = a + (b - a) * rng.random::<f64>();
            let j = BigUint::from(rng.random::<u128>()) % &qu;
            let base = TorusPoint::new(lift_unit(u, &j, &qu), rng.random());
            let s = rng.random::<f64>() * eng.phi(base);
            FlowPoint { base, s }
        })
        .collect()
}

/// Max displacement `d(T^{kₙ}p, p)` over sampled `p ∈ 𝒞ₙ` against `2εₙ`, with the
/// exact base bounds `|||kₙα||| ≤ q′ₙ/qₙ₊₁`, `|||kₙα′||| ≤ qₙ/q′ₙ₊₁`.
pub fn displacement_check(eng: &FlowEngine, cf: &CeilingFunction, n: usize, samples: usize, seed: u64) -> Result<CriterionReport> {
    let tv = eng.translation();
    let (q, qp) = tabulated(tv, n)?;
    let nu = cf.regime.nu(n);
    let k = &q * &qp;
    let eps = cf.regime.eps(&q);
    let mut rep = CriterionReport::new(format!("scpa.displacement.n{n}"))
        .param("n", n)
        .param("nu", nu)
        .param("k", &k)
        .param("bound", fmt_f64(2.0 * eps))
        .param("seed", seed);

    let (ok_x, dx) = base_bound(tv.exact(Axis::X), &k, tv.qp(n), tv.q(n + 1));
    let (ok_y, dy) = base_bound(tv.exact(Axis::Y), &k, tv.q(n), tv.qp(n + 1));
    rep.add_param("base_x_distance", fmt_f64(dx));
    rep.add_param("base_x_bound_holds", ok_x.map_or("untabulated".to_string(), |b| b.to_string()));
    rep.add_param("base_y_distance", fmt_f64(dy));
    rep.add_param("base_y_bound_holds", ok_y.map_or("untabulated".to_string(), |b| b.to_string()));

    let t = FlowTime::from_int(k.to_i128().ok_or_else(|| Error::Capacity(format!("k={k} exceeds the flow time range")))?);
    let pts = sample_c_points(eng, &q, nu, samples, seed, 0xd150 + n as u64);
    let d: Vec<f64> = pts.par_iter().map(|&p| Ok(eng.distance(eng.advance_time(p, t)?, p))).collect::<Result<_>>()?;
    let (i, worst) = d.iter().enumerate().fold((0, 0.0f64), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    rep.samples = pts.len() as u64;
    rep.add_param("max_displacement", fmt_f64(worst));
    rep.margin = if worst == 0.0 { f64::INFINITY } else { 2.0 * eps / worst };
    if !pts.is_empty() {
        let (x, y) = pts[i].base.to_f64();
        rep.witness = Some(format!("x={} y={} s={}", fmt_f64(x), fmt_f64(y), fmt_f64(pts[i].s)));
    }
    rep.decide();
    if ok_x == Some(false) || ok_y == Some(false) {
        rep.status = Status::Fail;
        rep.note("exact base translation bound violated");
    }
    Ok(rep)
}

/// `|||k·a|||` and whether it is `≤ num/den` (exact), when both are tabulated.
fn base_bound(a: &BigRational, k: &BigInt, num: Option<&BigInt>, den: Option<&BigInt>) -> (Option<bool>, f64) {
    let d = nearest_int_distance(&(a * BigRational::from_integer(k.clone())));
    let df = d.to_f64().unwrap_or(f64::NAN);
    match (num, den) {
        (Some(a), Some(b)) => (Some(d <= BigRational::new(a.clone(), b.clone())), df),
        _ => (None, df),
    }
}

/// Monte Carlo `μ(T^{kₙ}B △ B)/μ(B) = 2(1 − P[T^{kₙ}p ∈ B])` for boxes of
/// radius `1/(νqₙ)` centred in `𝒞ₙ`, against `γ^{−n}` with a 3-standard-error band.
///
/// Only meaningful while the fiber displacement `|S_{kₙ}φ − kₙ|` stays below the
/// radius; the ratio is reported as `displacement_over_radius`.
pub fn overlap_check(eng: &FlowEngine, cf: &CeilingFunction, n: usize, gamma: f64, balls: usize, per_ball: usize, seed: u64) -> Result<CriterionReport> {
    let tv = eng.translation();
    let (q, qp) = tabulated(tv, n)?;
    let nu = cf.regime.nu(n);
    let r = 1.0 / (nu * q.to_f64().unwrap_or(f64::INFINITY));
    let t = FlowTime::from_int((&q * &qp).to_i128().ok_or_else(|| Error::Capacity("return time exceeds the flow time range".into()))?);
    let target = gamma.powi(-(n as i32));
    let mut rep = CriterionReport::new(format!("scpa.overlap.n{n}"))
        .param("n", n)
        .param("radius", fmt_f64(r))
        .param("gamma", gamma)
        .param("target", fmt_f64(target))
        .param("balls", balls)
        .param("per_ball", per_ball);
    let centers = sample_c_points(eng, &q, nu, balls, seed, 0x0b00 + n as u64);
    let s_hi = eng.inf() - r;
    if s_hi <= r {
        return Err(Error::Precondition("ball radius exceeds the fiber floor".into()));
    }
    let results: Vec<(f64, f64)> = centers
        .par_iter()
        .enumerate()
        .map(|(bi, c0)| {
            let mut rng = stream(seed, 0x0b80 + (n as u64) * 65_536 + bi as u64);
            let c = FlowPoint { base: c0.base, s: r + (s_hi - r) * rng.random::<f64>() };
            let (cx, cy) = c.base.to_f64();
            let mut hits = 0usize;
            for _ in 0..per_ball {
                let base = TorusPoint::new(to_fixed(cx + r * (2.0 * rng.random::<f64>() - 1.0)), to_fixed(cy + r * (2.0 * rng.random::<f64>() - 1.0)));
                let p = FlowPoint { base, s: c.s + r * (2.0 * rng.random::<f64>() - 1.0) };
                let img = eng.advance_time(p, t)?;
                let inside = circ_dist(img.base.x, c.base.x) <= r && circ_dist(img.base.y, c.base.y) <= r && (img.s - c.s).abs() <= r;
                hits += inside as usize;
            }
            let p_hat = hits as f64 / per_ball as f64;
            Ok((2.0 * (1.0 - p_hat), 2.0 * (p_hat * (1.0 - p_hat) / per_ball as f64).sqrt()))
        })
        .collect::<Result<_>>()?;
    let probe = &centers[..centers.len().min(16)];
    let disp = probe
        .iter()
        .map(|&c| Ok(eng.distance(eng.advance_time(c, t)?, c)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    rep.add_param("displacement_over_radius", fmt_f64(disp / r));
    let mut worst = (0.0f64, 0.0, 0usize);
    for (i, &(ratio, se)) in results.iter().enumerate() {
        if ratio - 3.0 * se > worst.0 - 3.0 * worst.1 || i == 0 {
            worst = (ratio, se, i);
        }
    }
    rep.samples = (balls * per_ball) as u64;
    rep.add_param("max_ratio", fmt_f64(worst.0));
    rep.add_param("max_ratio_se", fmt_f64(worst.1));
    let lower = (worst.0 - 3.0 * worst.1).max(0.0);
    rep.margin = if lower == 0.0 { f64::INFINITY } else { target / lower };
    rep.witness = Some(format!("ball={}", worst.2));
    rep.decide();
    Ok(rep)
}

/// `∫_{𝒞ₙ} φ`: `x`-modes `cₖe(kx)` with `qₙ | k` contribute `cₖ∫_a^b e((k/qₙ)u) du`.
pub fn c_measure_exact(cf: &CeilingFunction, q: &BigInt, band: (f64, f64)) -> f64 {
    let (a, b) = band;
    let mut acc = b - a;
    for l in &cf.levels {
        for t in l.xt.terms() {
            let k = BigInt::from(t.k[0]);
            if (&k % q).is_zero() {
                let j = (&k / q).to_f64().unwrap_or(f64::INFINITY);
                let w = std::f64::consts::TAU * j;
                let e = |u: f64| Complex64::new(0.0, w * u).exp();
                acc += (t.c * (e(b) - e(a)) / Complex64::new(0.0, w)).re;
            }
        }
    }
    acc
}

/// Monte Carlo `μ(𝒞ₙ)`, `μ(⋃_{n≥m}𝒞ₙ)` and near-independence of consecutive bands.
pub fn coverage_check(eng: &FlowEngine, cf: &CeilingFunction, samples: usize, seed: u64) -> Result<CriterionReport> {
    let tv = eng.translation();
    let levels: Vec<usize> = cf.levels.iter().map(|l| l.n).collect();
    let mut rep = CriterionReport::new("scpa.coverage").param("levels", levels.len()).param("samples", samples).param("seed", seed);
    if levels.len() < 3 {
        rep.status = Status::InsufficientData;
        rep.margin = f64::NAN;
        rep.note("coverage needs at least three built levels");
        return Ok(rep);
    }
    let qs: Vec<BigInt> = levels.iter().map(|&n| tabulated(tv, n).map(|v| v.0)).collect::<Result<_>>()?;
    let bands: Vec<(f64, f64)> = levels.iter().map(|&n| c_band(cf.regime.nu(n))).collect();
    let chunk = 4096;
    let flags: Vec<Vec<bool>> = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream(seed, 0xc0e0 + c as u64);
            let len = chunk.min(samples - c * chunk);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let p = sample_mu(eng, &mut rng);
                out.push(
                    qs.iter()
                        .zip(&bands)
                        .map(|(q, &(a, b))| {
                            let u = from_fixed(p.base.x.wrapping_mul(q.to_u128().unwrap_or(0)));
                            (a..=b).contains(&u)
                        })
                        .collect(),
                );
            }
            out
        })
        .collect();
    let nf = samples as f64;
    let freq = |pred: &dyn Fn(&Vec<bool>) -> bool| flags.iter().filter(|f| pred(f)).count() as f64 / nf;
    let se = |p: f64| (p * (1.0 - p) / nf).sqrt();
    let mut ok = true;
    let mut margin = f64::INFINITY;
    for (i, &n) in levels.iter().enumerate() {
        let est = freq(&|f| f[i]);
        let exact = c_measure_exact(cf, &qs[i], bands[i]);
        let nu = cf.regime.nu(n);
        let width_bound = (1.0 / nu - 4.0 / (nu * nu)) * cf.inf_bound;
        rep.add_param(&format!("mu_c{n}"), fmt_f64(est));
        rep.add_param(&format!("mu_c{n}_exact"), fmt_f64(exact));
        rep.add_param(&format!("mu_c{n}_literal_bound_holds"), exact >= cf.inf_bound / nu);
        let agree = (est - exact).abs() <= 3.0 * se(exact) + 1e-12;
        ok &= agree && exact >= width_bound;
        margin = margin.min(exact / width_bound);
        if i + 1 < levels.len() {
            let both = freq(&|f| f[i] && f[i + 1]);
            let prod = freq(&|f| f[i]) * freq(&|f| f[i + 1]);
            rep.add_param(&format!("mu_c{n}_and_next"), fmt_f64(both));
            rep.add_param(&format!("mu_c{n}_times_next"), fmt_f64(prod));
            ok &= (both - prod).abs() <= 3.0 * se(prod) + 1e-12;
        }
    }
    for m in 0..levels.len() {
        let u = freq(&|f| f[m..].iter().any(|&b| b));
        rep.add_param(&format!("mu_union_from_{}", levels[m]), fmt_f64(u));
    }
    rep.samples = samples as u64;
    rep.margin = margin;
    rep.decide();
    if !ok {
        rep.status = Status::Fail;
        rep.witness = Some("Monte Carlo estimate outside its 3-standard-error band".into());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let k = |v: &[u64]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        assert!(SCPASpec { gamma: 4.0, tau: 3.0, k: k(&[240, 960, 15360]) }.validate().is_ok());
        assert!(SCPASpec { gamma: 4.0, tau: 3.0, k: k(&[240, 959]) }.validate().is_err());
        assert!(SCPASpec { gamma: 3.0, tau: 3.0, k: k(&[1]) }.validate().is_err());
    }

    #[test]
    fn bands_nest() {
        let (a, b) = scpa_band(12.0);
        let (c, d) = c_band(12.0);
        assert!(a < c && d < b);
    }
}
