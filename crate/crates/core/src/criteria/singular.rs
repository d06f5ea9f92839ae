//! Coherent partial sums along a rigidity sequence.
//!
//! Along `l = (j·kₙ)`, `T^{lᵢ}p` stays near `p` for `p` in the rigid bands, so
//! `Σ f(T^{lᵢ}p)` grows linearly. The comparison is against sums of the same
//! magnitudes with independent uniform phases, which grow like `√N`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;

use super::scpa::c_band;
use crate::ceiling::verify::lift_unit;
use crate::ceiling::CeilingFunction;
use crate::dynamics::{FlowEngine, FlowPoint, FlowTime, TorusPoint};
use crate::error::{Error, Result};
use crate::numeric::fixed::from_fixed;
use crate::numeric::rng::stream;
use crate::report::{fmt_f64, CriterionReport};
use crate::spectral::Observable;

/// Hard cap on the length of a generated sequence.
pub const MAX_SEQUENCE: usize = 1 << 16;

/// `(j·kₙ)` for `n = 1, 2, …` and `j = 1, …, ⌊τⁿ⌋`, in increasing order.
///
/// Needs `kₙ₊₁ ≥ τⁿ⁺¹kₙ`, which also makes the output strictly increasing.
pub fn singularity_sequence(tau: f64, k: &[BigUint]) -> Result<Vec<BigUint>> {
    if !(tau > 1.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!("tau must exceed 1, got {tau}")));
    }
    if k.is_empty() {
        return Err(Error::InvalidInput("empty return-time sequence".into()));
    }
    let mut out: Vec<BigUint> = Vec::new();
    for (i, kn) in k.iter().enumerate() {
        let n = i as i32 + 1;
        if i + 1 < k.len() {
            let g = BigUint::from_f64(tau.powi(n + 1).ceil()).ok_or_else(|| Error::Capacity(format!("tau^{} overflows", n + 1)))?;
            if k[i + 1] < &g * kn {
                return Err(Error::InvalidInput(format!("k{} < tau^{}·k{}", n + 1, n + 1, n)));
            }
        }
        let reps = tau.powi(n).floor() as usize;
        if out.len() + reps > MAX_SEQUENCE {
            return Err(Error::Capacity(format!("sequence exceeds {MAX_SEQUENCE} terms")));
        }
        for j in 1..=reps {
            let v = kn * BigUint::from(j);
            if out.last().is_some_and(|l| *l >= v) {
                return Err(Error::InvalidInput(format!("sequence not increasing at level {n}")));
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Number of terms contributed by levels `1..=n`.
pub fn terms_through(tau: f64, n: usize) -> usize {
    (1..=n as i32).map(|m| tau.powi(m).floor() as usize).sum()
}

/// Points with `{qₙx}` in every `𝒞ₙ` band, `y` uniform and `s` uniform on `[s_lo, s_hi]`.
pub fn rigid_start_points(cf: &CeilingFunction, count: usize, s_range: (f64, f64), seed: u64) -> Result<Vec<FlowPoint>> {
    let mut qs = Vec::with_capacity(cf.levels.len());
    for l in &cf.levels {
        let q = l.q.to_u128().ok_or_else(|| Error::Capacity(format!("q{} exceeds 128 bits", l.n)))?;
        qs.push((q, c_band(cf.regime.nu(l.n))));
    }
    if qs.is_empty() {
        return Err(Error::Precondition("no levels to define rigid bands".into()));
    }
    let (q1, (a1, b1)) = qs[0];
    let q1u = BigUint::from(q1);
    let mut rng = stream(seed, 0x51e0);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0u64;
    while out.len() < count {
        tries += 1;
        if tries > 10_000_000 {
            return Err(Error::Capacity("rigid bands too thin for rejection sampling".into()));
        }
        let u = a1 + (b1 - a1) * rng.random::<f64>();
        let j = BigUint::from(rng.random::<u128>()) % &q1u;
        let x = lift_unit(u, &j, &q1u);
        let inside = qs[1..].iter().all(|&(q, (a, b))| (a..=b).contains(&from_fixed(x.wrapping_mul(q))));
        if !inside {
            continue;
        }
        let s = s_range.0 + (s_range.1 - s_range.0) * rng.random::<f64>();
        out.push(FlowPoint { base: TorusPoint::new(x, rng.random()), s });
    }
    Ok(out)
}

/// Inputs of [`singularity_partial_sums`].
#[derive(Debug, Clone)]
pub struct SpectralProbe {
    pub f: Observable,
    pub tau: f64,
    /// Return times `k₁, k₂, …`.
    pub k: Vec<BigUint>,
    pub starts: Vec<FlowPoint>,
    /// Independent phase draws per start for the baseline.
    pub draws: usize,
    /// Floor on `|S_N|/N` counted in the diagnostics.
    pub floor: f64,
    pub seed: u64,
}

/// Median over starts of `|S_N(p)| / 𝔼|Σ|f(T^{lᵢ}p)|e^{iθᵢ}|` at the last level,
/// against 2.
pub fn singularity_partial_sums(eng: &FlowEngine, probe: &SpectralProbe) -> Result<CriterionReport> {
    let seq = singularity_sequence(probe.tau, &probe.k)?;
    let times: Vec<FlowTime> = seq
        .iter()
        .map(|l| l.to_i128().map(FlowTime::from_int).ok_or_else(|| Error::Capacity(format!("time {l} exceeds the flow time range"))))
        .collect::<Result<_>>()?;
    let levels = probe.k.len();
    let cuts: Vec<usize> = (1..=levels).map(|n| terms_through(probe.tau, n)).collect();
    let mut rep = CriterionReport::new("singularity.partial_sums")
        .param("tau", probe.tau)
        .param("levels", levels)
        .param("terms", seq.len())
        .param("starts", probe.starts.len())
        .param("draws", probe.draws)
        .param("seed", probe.seed);
    rep.tolerance = 2.0;
    if probe.starts.is_empty() {
        return Err(Error::InvalidInput("no start points".into()));
    }

    // ratios[start][level], scaled[start] = |S_N|/N at the last level.
    let rows: Vec<(Vec<f64>, f64)> = probe
        .starts
        .par_iter()
        .enumerate()
        .map(|(si, &p)| {
            let vals: Vec<Complex64> = times.iter().map(|&t| Ok(probe.f.eval(eng.advance_time(p, t)?))).collect::<Result<_>>()?;
            let mut rng = stream(probe.seed, 0x5190_0000 + si as u64);
            let mut base = vec![0.0; levels];
            for _ in 0..probe.draws {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut c = 0;
                for (i, v) in vals.iter().enumerate() {
                    acc += Complex64::from_polar(v.norm(), std::f64::consts::TAU * rng.random::<f64>());
                    if i + 1 == cuts[c] {
                        base[c] += acc.norm() / probe.draws as f64;
                        c += 1;
                    }
                }
            }
            let mut ratios = Vec::with_capacity(levels);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut c = 0;
            for (i, v) in vals.iter().enumerate() {
                acc += v;
                if i + 1 == cuts[c] {
                    ratios.push(if base[c] > 0.0 { acc.norm() / base[c] } else { 0.0 });
                    c += 1;
                }
            }
            Ok((ratios, acc.norm() / vals.len() as f64))
        })
        .collect::<Result<_>>()?;

    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let m = v.len();
        if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) }
    };
    for n in 0..levels {
        rep.add_param(&format!("median_ratio_n{}", n + 1), fmt_f64(median(rows.iter().map(|r| r.0[n]).collect())));
    }
    let last: Vec<f64> = rows.iter().map(|r| r.0[levels - 1]).collect();
    let ns = last.len() as f64;
    rep.add_param("fraction_ratio_ge_2", fmt_f64(last.iter().filter(|&&r| r >= 2.0).count() as f64 / ns));
    rep.add_param("floor", fmt_f64(probe.floor));
    rep.add_param("fraction_above_floor", fmt_f64(rows.iter().filter(|r| r.1 >= probe.floor).count() as f64 / ns));
    rep.samples = (probe.starts.len() * seq.len()) as u64;
    rep.margin = median(last.clone());
    let (wi, _) = last.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &r)| if r < a.1 { (i, r) } else { a });
    let (x, y) = probe.starts[wi].base.to_f64();
    rep.witness = Some(format!("weakest start x={} y={} s={}", fmt_f64(x), fmt_f64(y), fmt_f64(probe.starts[wi].s)));
    rep.decide();
    Ok(rep)
}
