//! Stretching of Birkhoff sums: `|D_x S_mφ| ≥ m·εₙ` on `{qₙx} ∈ Iₙ` and the
//! `y`-analogue, plus the lower-level bounds.

use num_bigint::{BigInt, BigUint};
use num_traits::{FromPrimitive, One, ToPrimitive};
use rayon::prelude::*;

use crate::arithmetic::{Axis, TranslationVector};
use crate::ceiling::verify::band_samples;
use crate::ceiling::{CeilingFunction, Regime, SampleOptions};
use crate::dynamics::birkhoff_polynomial;
use crate::error::{Error, Result};
use crate::numeric::fixed::{from_fixed, to_fixed};
use crate::report::{fmt_f64, CriterionReport, Status};
use crate::trig::{Lattice1D, TrigPolynomial};

/// Default number of `m` samples per window.
pub const M_SAMPLES: usize = 32;

/// Band and window data for one stretch check.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingBandSpec {
    pub n: usize,
    pub axis: Axis,
    /// Denominator `qₙ` (x) or `q′ₙ` (y) defining the band coordinate `{q·t}`.
    pub q: BigInt,
    pub nu: f64,
    pub bands: Vec<(f64, f64)>,
    pub m_lo: f64,
    pub m_hi: f64,
    pub m_count: usize,
    /// Threshold scale: the check asks for `|D S_mφ| ≥ m·eps`.
    pub eps: f64,
}

/// `[3/ν, 1/2 − 2/ν] ∪ [1/2 + 3/ν, 1 − 2/ν]`.
pub fn default_bands(nu: f64) -> Vec<(f64, f64)> {
    vec![(3.0 / nu, 0.5 - 2.0 / nu), (0.5 + 3.0 / nu, 1.0 - 2.0 / nu)]
}

fn need(v: Option<&BigInt>, what: &str, n: usize) -> Result<BigInt> {
    v.cloned().ok_or_else(|| Error::Precondition(format!("{what} for level {n} is not tabulated")))
}

impl MixingBandSpec {
    /// `Iₙ` in `{qₙx}`, `m ∈ [W(qₙ)/2, 2W(q′ₙ)]`, threshold `εₙ`.
    pub fn x_default(tv: &TranslationVector, regime: &Regime, n: usize) -> Result<Self> {
        let q = need(tv.q(n), "q", n)?;
        let qp = need(tv.qp(n), "q'", n)?;
        let nu = regime.nu(n);
        Ok(Self {
            n,
            axis: Axis::X,
            m_lo: regime.w(&q) / 2.0,
            m_hi: 2.0 * regime.w(&qp),
            eps: regime.eps(&q),
            q,
            nu,
            bands: default_bands(nu),
            m_count: M_SAMPLES,
        })
    }

    /// `I′ₙ` in `{q′ₙy}`, `m ∈ [W(q′ₙ)/2, 2W(qₙ₊₁)]`, threshold `ε′ₙ`.
    pub fn y_default(tv: &TranslationVector, regime: &Regime, n: usize) -> Result<Self> {
        let qp = need(tv.qp(n), "q'", n)?;
        let q_next = need(tv.q(n + 1), "q", n + 1)?;
        let nu = regime.nu(n);
        Ok(Self {
            n,
            axis: Axis::Y,
            m_lo: regime.w(&qp) / 2.0,
            m_hi: 2.0 * regime.w(&q_next),
            eps: regime.eps_p(&qp),
            q: qp,
            nu,
            bands: default_bands(nu),
            m_count: M_SAMPLES,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for &(a, b) in &self.bands {
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(Error::InvalidInput(format!("band [{a}, {b}] is not a nonempty subset of [0,1)")));
            }
        }
        if !(self.m_lo >= 1.0 && self.m_lo < self.m_hi && self.m_hi.is_finite()) {
            return Err(Error::InvalidInput(format!("m window [{}, {}] is empty or unbounded", self.m_lo, self.m_hi)));
        }
        if self.m_count < 2 {
            return Err(Error::InvalidInput("need at least two m samples".into()));
        }
        Ok(())
    }

    /// Log-spaced integers across the window, endpoints included.
    pub fn m_samples(&self) -> Vec<BigUint> {
        let (a, b) = (self.m_lo.ln(), self.m_hi.ln());
        let mut out: Vec<BigUint> = (0..self.m_count)
            .map(|i| {
                let m = (a + (b - a) * i as f64 / (self.m_count - 1) as f64).exp().round().max(1.0);
                BigUint::from_f64(m).unwrap_or_else(BigUint::one)
            })
            .collect();
        out.dedup();
        out
    }
}

/// 1-D polynomial with a dense evaluator when available.
pub(crate) struct Eval1 {
    lat: Option<Lattice1D>,
    poly: TrigPolynomial,
}

impl Eval1 {
    pub(crate) fn new(poly: TrigPolynomial) -> Self {
        Self { lat: poly.lattice(), poly }
    }

    pub(crate) fn at(&self, x: u128) -> f64 {
        match &self.lat {
            Some(l) => l.eval(x).re,
            None => self.poly.eval(x, 0).re,
        }
    }
}

/// `S_m p` for a 1-D polynomial in the coordinate of `axis`, kept 1-D.
pub(crate) fn birkhoff_1d(p: &TrigPolynomial, axis: Axis, m: &BigUint, tv: &TranslationVector) -> Result<TrigPolynomial> {
    match axis {
        Axis::X => birkhoff_polynomial(p, m, tv),
        Axis::Y => {
            let s = birkhoff_polynomial(&p.lift(1), m, tv)?;
            TrigPolynomial::from_1d(s.terms().iter().map(|t| (t.k[1], t.c)))
        }
    }
}

/// `D S_m` of each level polynomial along `axis`.
fn level_derivs(cf: &CeilingFunction, tv: &TranslationVector, axis: Axis, m: &BigUint) -> Result<Vec<(usize, Eval1)>> {
    cf.levels
        .iter()
        .map(|l| {
            let p = if axis == Axis::X { &l.xt } else { &l.y };
            Ok((l.n, Eval1::new(birkhoff_1d(p, axis, m, tv)?.derivative(0, 1))))
        })
        .collect()
}

fn header(id: String, spec: &MixingBandSpec, cf: &CeilingFunction) -> CriterionReport {
    CriterionReport::new(id)
        .param("n", spec.n)
        .param("nu", spec.nu)
        .param("q", &spec.q)
        .param("eps", fmt_f64(spec.eps))
        .param("m_lo", fmt_f64(spec.m_lo))
        .param("m_hi", fmt_f64(spec.m_hi))
        .param("m_count", spec.m_count)
        .param("regime", cf.regime.summary())
}

fn stretch_check(cf: &CeilingFunction, tv: &TranslationVector, spec: &MixingBandSpec, opts: &SampleOptions) -> Result<CriterionReport> {
    spec.validate()?;
    let tag = if spec.axis == Axis::X { "x" } else { "y" };
    let mut rep = header(format!("stretch.{tag}.n{}", spec.n), spec, cf);
    let stream_id = 0x5700 + 2 * spec.n as u64 + (spec.axis == Axis::Y) as u64;
    let pts = band_samples(&spec.q, &spec.bands, opts, stream_id);
    let ms = spec.m_samples();
    let nu = spec.nu;
    // Sign of the dominant slope on the first band: X̃ₙ rises, Yₙ = ε′cos falls.
    let s0 = if spec.axis == Axis::X { 1.0 } else { -1.0 };
    let sign = |u: f64| if u < 0.5 { s0 } else { -s0 };
    let tail = match spec.axis {
        Axis::X => tv.q(spec.n + 1).map(|q| 2.0 * cf.regime.eps(q).sqrt()).unwrap_or(f64::INFINITY),
        Axis::Y => 0.0,
    };
    let qf = spec.q.to_f64().unwrap_or(f64::INFINITY);
    let (mut dom_margin, mut resid_max, mut resid_margin) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for m in &ms {
        let mf = m.to_f64().unwrap_or(f64::INFINITY);
        let levels = level_derivs(cf, tv, spec.axis, m)?;
        let (worst, at, dom, resid) = pts
            .par_iter()
            .map(|&(u, x)| {
                let (mut own, mut rest) = (0.0, 0.0);
                for (n, e) in &levels {
                    let v = e.at(x);
                    if *n == spec.n {
                        own += v;
                    } else {
                        rest += v;
                    }
                }
                ((own + rest).abs() / (mf * spec.eps), (u, x), sign(u) * own / (2.0 * mf * spec.eps), rest.abs())
            })
            .reduce(
                || (f64::INFINITY, (f64::NAN, 0), f64::INFINITY, 0.0),
                |a, b| {
                    let (w, at) = if b.0 < a.0 { (b.0, b.1) } else { (a.0, a.1) };
                    (w, at, a.2.min(b.2), a.3.max(b.3))
                },
            );
        rep.samples += pts.len() as u64;
        if worst < rep.margin {
            rep.margin = worst;
            rep.witness = Some(format!("m={m} u={} coord={}", fmt_f64(at.0), fmt_f64(from_fixed(at.1))));
        }
        dom_margin = dom_margin.min(dom);
        resid_max = resid_max.max(resid);
        if spec.axis == Axis::X {
            resid_margin = resid_margin.min((qf + tail * mf) / resid.max(f64::MIN_POSITIVE));
        }
    }
    if !rep.margin.is_finite() {
        rep.margin = 0.0;
    }
    rep.add_param("band_nu", nu);
    rep.add_param("points", pts.len());
    rep.add_param("dominant_margin", fmt_f64(dom_margin));
    rep.add_param("residual_max", fmt_f64(resid_max));
    if spec.axis == Axis::X {
        rep.add_param("residual_margin", fmt_f64(resid_margin));
        rep.note("D_x S_m phi does not depend on y: the Y-levels have no x-frequencies");
    } else {
        rep.note("D_y S_m phi does not depend on x: the X-levels have no y-frequencies");
    }
    rep.decide();
    Ok(rep)
}

/// `min |D_xS_mφ|/(m·εₙ)` over the band samples and the `m` window.
pub fn stretch_check_x(cf: &CeilingFunction, tv: &TranslationVector, spec: &MixingBandSpec, opts: &SampleOptions) -> Result<CriterionReport> {
    if spec.axis != Axis::X {
        return Err(Error::InvalidInput("stretch_check_x needs an x band spec".into()));
    }
    stretch_check(cf, tv, spec, opts)
}

/// `min |D_yS_mφ|/(m·ε′ₙ)` over the band samples and the `m` window.
pub fn stretch_check_y(cf: &CeilingFunction, tv: &TranslationVector, spec: &MixingBandSpec, opts: &SampleOptions) -> Result<CriterionReport> {
    if spec.axis != Axis::Y {
        return Err(Error::InvalidInput("stretch_check_y needs a y band spec".into()));
    }
    stretch_check(cf, tv, spec, opts)
}

/// Lower-level bounds at level `n`: `‖S_{qₙ}Σ_{l<n}X̃_l‖` against the band
/// bound and `‖S_mΣ_{l<n}X̃′_l‖ ≤ qₙ` for `m` across the x-window, on a uniform
/// grid of `grid` points.
pub fn lower_level_check(cf: &CeilingFunction, tv: &TranslationVector, n: usize, grid: usize) -> Result<CriterionReport> {
    let q = need(tv.q(n), "q", n)?;
    let qp = need(tv.qp(n), "q'", n)?;
    let mut rep = CriterionReport::new(format!("lower.n{n}")).param("n", n).param("q", &q).param("qp", &qp).param("grid", grid);
    let lower: Vec<&TrigPolynomial> = cf.levels.iter().filter(|l| l.n < n).map(|l| &l.xt).collect();
    if lower.is_empty() {
        rep.note("no lower levels: both sums vanish identically");
        rep.margin = f64::INFINITY;
        rep.status = Status::Pass;
        return Ok(rep);
    }
    let mut sum = TrigPolynomial::zero(1);
    for p in &lower {
        sum = sum.add(p)?;
    }
    let xs: Vec<u128> = (0..grid).map(|i| to_fixed(i as f64 / grid as f64)).collect();
    let sup = |e: &Eval1| xs.par_iter().map(|&x| e.at(x).abs()).reduce(|| 0.0, f64::max);

    let qu = q.to_biguint().expect("positive denominator");
    let s5 = sup(&Eval1::new(birkhoff_polynomial(&sum, &qu, tv)?));
    let b5 = cf.regime.band_bound(&q, &qp);
    let qpf = qp.to_f64().unwrap_or(f64::INFINITY);
    rep.add_param("band_sup", fmt_f64(s5));
    rep.add_param("band_bound", fmt_f64(b5));
    rep.add_param("band_literal_bound", fmt_f64(1.0 / (qpf * qpf)));
    let m5 = if s5 == 0.0 { f64::INFINITY } else { b5 / s5 };

    let spec = MixingBandSpec::x_default(tv, &cf.regime, n)?;
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    let (mut s6, mut at6) = (0.0f64, BigUint::one());
    for m in spec.m_samples() {
        let d = Eval1::new(birkhoff_polynomial(&sum, &m, tv)?.derivative(0, 1));
        let v = sup(&d);
        if v > s6 {
            s6 = v;
            at6 = m;
        }
    }
    rep.add_param("slope_sup", fmt_f64(s6));
    rep.add_param("slope_bound", fmt_f64(qf));
    rep.add_param("slope_m_count", spec.m_count);
    let m6 = if s6 == 0.0 { f64::INFINITY } else { qf / s6 };
    rep.samples = (grid * (1 + spec.m_count)) as u64;
    rep.margin = m5.min(m6);
    rep.witness = Some(if m5 <= m6 { "bound=band".to_string() } else { format!("bound=slope m={at6}") });
    rep.decide();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_and_samples() {
        let b = default_bands(12.0);
        assert!((b[0].0 - 0.25).abs() < 1e-15 && (b[1].1 - (1.0 - 1.0 / 6.0)).abs() < 1e-15);
        let spec = MixingBandSpec {
            n: 1,
            axis: Axis::X,
            q: BigInt::from(2),
            nu: 12.0,
            bands: b,
            m_lo: 1.5,
            m_hi: 3000.0,
            m_count: 32,
            eps: 0.01,
        };
        spec.validate().unwrap();
        let ms = spec.m_samples();
        assert_eq!(ms.first().unwrap(), &BigUint::from(2u8));
        assert_eq!(ms.last().unwrap(), &BigUint::from(3000u32));
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        let bad = MixingBandSpec { m_lo: 10.0, m_hi: 5.0, ..spec };
        assert!(bad.validate().is_err());
    }
}
