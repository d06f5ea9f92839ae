//! Verifiers for the per-level properties of `X̃ₙ` and for the coboundary identity.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use super::assemble::{CeilingFunction, CeilingLevel};
use crate::arithmetic::Rotation;
use crate::numeric::dd::{CDd, Dd};
use crate::numeric::fixed::{from_fixed, signed_turns_dd, to_fixed};
use crate::numeric::rng::stream;
use crate::report::{fmt_f64, CriterionReport, Status};
use crate::trig::{phase, TrigPolynomial};

/// Grid and Monte Carlo sizes for band scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOptions {
    pub grid: usize,
    pub random: usize,
    pub seed: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { grid: 10_000, random: 10_000, seed: 0x5eed }
    }
}

/// The point `x = (j + u)/q` of period `j` with `{qx} = u`, in fixed point.
pub fn lift_unit(u: f64, j: &BigUint, q: &BigUint) -> u128 {
    let num = (j << 128u32) + BigUint::from(to_fixed(u));
    (num / q).to_u128().unwrap_or(u128::MAX)
}

/// Band samples `(u, x)`: an even grid across the bands (endpoints included)
/// spread over periods, plus uniform random points.
pub fn band_samples(q: &BigInt, bands: &[(f64, f64)], opts: &SampleOptions, stream_id: u64) -> Vec<(f64, u128)> {
    let qu = q.to_biguint().expect("positive denominator");
    let total: f64 = bands.iter().map(|(a, b)| (b - a).max(0.0)).sum();
    let mut out = Vec::with_capacity(opts.grid + opts.random);
    if total <= 0.0 {
        return out;
    }
    let mut i = 0u64;
    for &(a, b) in bands {
        let m = ((opts.grid as f64 * (b - a) / total).round() as usize).max(2);
        for t in 0..m {
            let u = a + (b - a) * t as f64 / (m - 1) as f64;
            let j = BigUint::from(i.wrapping_mul(7919)) % &qu;
            out.push((u, lift_unit(u, &j, &qu)));
            i += 1;
        }
    }
    let mut rng = stream(opts.seed, stream_id);
    for _ in 0..opts.random {
        let mut s = rng.random::<f64>() * total;
        let mut u = bands[0].0;
        for &(a, b) in bands {
            let w = (b - a).max(0.0);
            if s < w {
                u = a + s;
                break;
            }
            s -= w;
        }
        let j = BigUint::from(rng.random::<u128>()) % &qu;
        out.push((u, lift_unit(u, &j, &qu)));
    }
    out
}

fn level_or_missing<'a>(cf: &'a CeilingFunction, n: usize, id: &str) -> Result<&'a CeilingLevel, CriterionReport> {
    cf.level(n).ok_or_else(|| {
        let mut r = CriterionReport::new(id).param("n", n);
        r.status = Status::InsufficientData;
        r.margin = f64::NAN;
        r.note(format!("level {n} not built"));
        r
    })
}

fn header(id: &str, l: &CeilingLevel) -> CriterionReport {
    CriterionReport::new(id)
        .param("n", l.n)
        .param("nu", l.nu)
        .param("q", &l.q)
        .param("qp", &l.qp)
        .param("eps", fmt_f64(l.eps))
}

/// Every level polynomial has coefficient exactly 0 at `k = 0`.
pub fn check_mean(cf: &CeilingFunction, n: usize) -> CriterionReport {
    let id = format!("xtilde.mean.n{n}");
    let l = match level_or_missing(cf, n, &id) {
        Ok(l) => l,
        Err(r) => return r,
    };
    let mut r = header(&id, l);
    let zero = Complex64::new(0.0, 0.0);
    let c = [l.hat.mean(), l.xt.mean(), l.psi.psi.mean(), l.y.mean()];
    r.samples = 4;
    r.margin = if c.iter().all(|&c| c == zero) { 1.0 } else { 0.0 };
    if r.margin < 1.0 {
        r.witness = Some(format!("c0(xt)={} c0(y)={}", l.xt.mean(), l.y.mean()));
    }
    r.decide();
    r
}

/// Smoothness: `Σ(2π|k|)^r|cₖ| ≤` regime bound for `r ≤ r_max`.
pub fn check_cr_norms(cf: &CeilingFunction, n: usize, r_max: u32) -> CriterionReport {
    let id = format!("xtilde.smoothness.n{n}");
    let l = match level_or_missing(cf, n, &id) {
        Ok(l) => l,
        Err(r) => return r,
    };
    let mut rep = header(&id, l).param("r_max", r_max);
    for r in 0..=r_max {
        let f = l.xt.weighted_l1(r as i32);
        let b = cf.regime.cr_bound(&l.q, l.nu, r);
        let ratio = if f == 0.0 { f64::INFINITY } else { b / f };
        rep.add_param(&format!("fourier_r{r}"), fmt_f64(f));
        rep.add_param(&format!("bound_r{r}"), fmt_f64(b));
        if ratio < rep.margin {
            rep.margin = ratio;
            rep.witness = Some(format!("r={r}"));
        }
        rep.samples += 1;
    }
    rep.decide();
    rep
}

/// Band smallness: `|X̃ₙ| ≤` band bound on `{qₙx} ∈ [0, 1/ν]`.
pub fn check_band_smallness(cf: &CeilingFunction, n: usize, opts: &SampleOptions) -> CriterionReport {
    let id = format!("xtilde.band.n{n}");
    let l = match level_or_missing(cf, n, &id) {
        Ok(l) => l,
        Err(r) => return r,
    };
    let bound = cf.regime.band_bound(&l.q, &l.qp);
    let mut rep = header(&id, l).param("bound", fmt_f64(bound));
    rep.tolerance = 1.2;
    let pts = band_samples(&l.q, &[(0.0, 1.0 / l.nu)], opts, 3 * n as u64);
    let (worst, at) = pts
        .par_iter()
        .map(|&(u, x)| (l.xt_eval(x).abs(), (u, x)))
        .reduce(|| (0.0, (0.0, 0)), |a, b| if b.0 > a.0 { b } else { a });
    rep.samples = pts.len() as u64;
    rep.margin = if worst == 0.0 { f64::INFINITY } else { bound / worst };
    rep.add_param("max_abs", fmt_f64(worst));
    rep.witness = Some(format!("u={} x={}", fmt_f64(at.0), fmt_f64(from_fixed(at.1))));
    rep.decide();
    rep
}

/// Slope: `±X̃ₙ′ ≥ 2εₙ` on `[2/ν, 1/2 − 1/ν]` (+) and `[1/2 + 2/ν, 1 − 1/ν]` (−).
pub fn check_slope(cf: &CeilingFunction, n: usize, opts: &SampleOptions) -> CriterionReport {
    check_slope_of(cf, n, opts, None)
}

/// As [`check_slope`], with an optional replacement for `X̃ₙ`.
pub fn check_slope_of(cf: &CeilingFunction, n: usize, opts: &SampleOptions, xt: Option<&TrigPolynomial>) -> CriterionReport {
    let id = format!("xtilde.slope.n{n}");
    let l = match level_or_missing(cf, n, &id) {
        Ok(l) => l,
        Err(r) => return r,
    };
    let thr = cf.regime.slope_threshold(&l.q);
    let mut rep = header(&id, l).param("threshold", fmt_f64(thr));
    rep.tolerance = 1.2;
    let d = xt.unwrap_or(&l.xt).derivative(0, 1);
    let lat = d.lattice();
    let ev = |x: u128| match &lat {
        Some(lt) => lt.eval(x).re,
        None => d.eval(x, 0).re,
    };
    let nu = l.nu;
    for (sign, band, sid) in [(1.0, (2.0 / nu, 0.5 - 1.0 / nu), 1u64), (-1.0, (0.5 + 2.0 / nu, 1.0 - 1.0 / nu), 2)] {
        let pts = band_samples(&l.q, &[band], opts, 4 * n as u64 + 1000 * sid);
        let (worst, at) = pts
            .par_iter()
            .map(|&(u, x)| (sign * ev(x) / thr, u))
            .reduce(|| (f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a });
        rep.samples += pts.len() as u64;
        if worst < rep.margin {
            rep.margin = worst;
            rep.witness = Some(format!("u={} sign={sign}", fmt_f64(at)));
        }
    }
    rep.decide();
    rep
}

/// All level checks of level `n`, folded into one report.
pub fn verify_xtilde_properties(cf: &CeilingFunction, n: usize, r_max: u32, opts: &SampleOptions) -> (CriterionReport, Vec<CriterionReport>) {
    let parts = vec![
        check_mean(cf, n),
        check_cr_norms(cf, n, r_max),
        check_band_smallness(cf, n, opts),
        check_slope(cf, n, opts),
    ];
    let mut all = CriterionReport::new(format!("xtilde.n{n}")).param("n", n);
    all.margin = f64::INFINITY;
    // Each part has its own tolerance; fold the normalized margins.
    for p in &parts {
        let mut q = p.clone();
        q.margin = p.margin / p.tolerance;
        all.absorb(&q);
    }
    all.decide();
    (all, parts)
}

/// Double-double evaluation of `Σ cₖ e(k·m·α) e(kx)` at every point `i/2^bits`.
///
/// Phases `{kmα}` come from exact residues; grid phases `k·i/2^bits` are exact.
pub fn shifted_grid_eval_dd(p: &TrigPolynomial, rot: &Rotation, m: &BigInt, bits: u32) -> Vec<CDd> {
    let n = 1usize << bits;
    let mask = (n - 1) as i128;
    let mut bins = vec![CDd::default(); n];
    for t in p.terms() {
        let k = t.k[0];
        let c = if m.is_zero() {
            CDd { re: Dd::new(t.c.re), im: Dd::new(t.c.im) }
        } else {
            let r = if m.is_one() { rot.residue_i128(k) } else { rot.residue(&(BigInt::from(k) * m)) };
            CDd::cis_turns(rot.turns_dd(&r)).scale_c64(t.c)
        };
        let b = (k & mask) as usize;
        bins[b] = bins[b] + c;
    }
    let table: Vec<CDd> = (0..n).map(|i| CDd::cis_turns(Dd::new(i as f64) / Dd::new(n as f64))).collect();
    let occupied: Vec<(usize, CDd)> = bins.into_iter().enumerate().filter(|(_, c)| c.re.hi != 0.0 || c.im.hi != 0.0).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = CDd::default();
            for &(b, c) in &occupied {
                let w = table[(b * i) & (n - 1)];
                acc = acc + cmul(c, w);
            }
            acc
        })
        .collect()
}

fn cmul(a: CDd, b: CDd) -> CDd {
    CDd { re: a.re * b.re - a.im * b.im, im: a.re * b.im + a.im * b.re }
}

/// Double-double evaluation of `p(x + mα)` at arbitrary fixed-point points.
pub fn shifted_eval_dd(p: &TrigPolynomial, rot: &Rotation, m: &BigInt, xs: &[u128]) -> Vec<CDd> {
    let coeffs: Vec<(i128, CDd)> = p
        .terms()
        .iter()
        .map(|t| {
            let r = rot.residue(&(BigInt::from(t.k[0]) * m));
            (t.k[0], CDd::cis_turns(rot.turns_dd(&r)).scale_c64(t.c))
        })
        .collect();
    // Terms come sorted by frequency; `e(kx)` is advanced by `e(Δx)`, which is
    // recomputed only when the gap `Δ` changes (never, on a lattice).
    xs.par_iter()
        .map(|&x| {
            let mut acc = CDd::default();
            let mut prev: Option<(i128, CDd)> = None;
            let mut step: Option<(i128, CDd)> = None;
            for &(k, c) in &coeffs {
                let w = match prev {
                    None => CDd::cis_turns(signed_turns_dd(phase([k, 0], x, 0))),
                    Some((kp, wp)) => {
                        let d = k - kp;
                        let s = match step {
                            Some((ds, s)) if ds == d => s,
                            _ => CDd::cis_turns(signed_turns_dd(phase([d, 0], x, 0))),
                        };
                        step = Some((d, s));
                        cmul(wp, s)
                    }
                };
                prev = Some((k, w));
                acc = acc + cmul(c, w);
            }
            acc
        })
        .collect()
}

fn cdd_abs(z: CDd) -> f64 {
    z.re.to_f64().hypot(z.im.to_f64())
}

/// Sup over the `2^bits` grid of `|X̃ₙ(x) − ψₙ(x + α) + ψₙ(x)|`, in double-double.
pub fn coboundary_check(cf: &CeilingFunction, n: usize, rot: &Rotation, bits: u32, tol: f64) -> CriterionReport {
    let id = format!("coboundary.n{n}");
    let l = match level_or_missing(cf, n, &id) {
        Ok(l) => l,
        Err(r) => return r,
    };
    let mut rep = header(&id, l).param("grid_bits", bits).param("tol", fmt_f64(tol));
    let xt = shifted_grid_eval_dd(&l.xt, rot, &BigInt::zero(), bits);
    let psi0 = shifted_grid_eval_dd(&l.psi.psi, rot, &BigInt::zero(), bits);
    let psi1 = shifted_grid_eval_dd(&l.psi.psi, rot, &BigInt::one(), bits);
    let (mut worst, mut at, mut psi_max) = (0.0f64, 0usize, 0.0f64);
    for i in 0..xt.len() {
        let res = cdd_abs(xt[i] - (psi1[i] - psi0[i]));
        psi_max = psi_max.max(cdd_abs(psi0[i]));
        if res > worst {
            worst = res;
            at = i;
        }
    }
    rep.samples = xt.len() as u64;
    rep.add_param("max_residual", fmt_f64(worst));
    rep.add_param("max_abs_psi", fmt_f64(psi_max));
    rep.margin = if worst == 0.0 { f64::INFINITY } else { tol / worst };
    rep.witness = Some(format!("x={}/{}", at, 1u64 << bits));
    rep.decide();
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn lift_unit_reduces_back() {
        let q = BigUint::from(432001u32);
        let x = lift_unit(0.3, &BigUint::from(1234u32), &q);
        let u = from_fixed(x.wrapping_mul(432001));
        assert!((u - 0.3).abs() < 1e-12);
    }

    #[test]
    fn band_samples_stay_in_band() {
        let q = BigInt::from(97);
        let opts = SampleOptions { grid: 100, random: 100, seed: 1 };
        let s = band_samples(&q, &[(0.1, 0.2), (0.6, 0.7)], &opts, 0);
        assert!(s.len() >= 200);
        for (u, x) in s {
            assert!((0.1..=0.2).contains(&u) || (0.6..=0.7).contains(&u));
            let v = from_fixed(x.wrapping_mul(97));
            assert!((v - u).abs() < 1e-9);
        }
    }

    #[test]
    fn deep_preset_properties() {
        let p = presets::deep();
        let tv = p.vector().unwrap();
        let cf = p.ceiling(&tv).unwrap();
        let opts = SampleOptions { grid: 2000, random: 2000, seed: 3 };
        for n in 1..=4 {
            let (all, parts) = verify_xtilde_properties(&cf, n, 3, &opts);
            for r in &parts {
                eprintln!("{}", r.to_text());
            }
            assert!(all.passed(), "level {n}");
        }
    }

    #[test]
    fn desk_coboundary_in_double_double() {
        let p = presets::desk();
        let tv = p.vector().unwrap();
        let cf = p.ceiling(&tv).unwrap();
        let rot = tv.rotation(crate::arithmetic::Axis::X);
        for n in 1..=2 {
            let r = coboundary_check(&cf, n, rot, 12, 1e-10);
            eprintln!("{}", r.to_text());
            assert!(r.passed());
        }
    }
}
