//! Correlations `⟨f∘T^t, g⟩_μ` by product-grid quadrature and by orbit averages.

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::observable::Observable;
use crate::arithmetic::{Axis, TranslationVector};
use crate::dynamics::{FlowEngine, FlowPoint, FlowTime, TorusPoint};
use crate::error::{Error, Result};
use crate::numeric::fixed::to_fixed;
use crate::numeric::quad::gauss_legendre;
use crate::numeric::rng::stream;
use crate::numeric::sum::NeumaierC;
use crate::trig::expm1_turns;

use super::observable::FiberBump;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Midpoint rule in `(x, y)`, Gauss–Legendre in `s` over the support of `χ`.
    Grid,
    /// Batch means over independent orbit segments started from `μ`.
    Orbit,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Grid => "grid-quadrature",
            Estimator::Orbit => "orbit-average",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationOptions {
    pub grid_x: usize,
    pub grid_y: usize,
    pub fiber_nodes: usize,
    /// Total orbit length in steps, split evenly over `batches`.
    pub orbit_len: usize,
    pub batches: usize,
    pub seed: u64,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self { grid_x: 32, grid_y: 8, fiber_nodes: 8, orbit_len: 1_000_000, batches: 100, seed: 0x5eed }
    }
}

/// One correlation value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub value: Complex64,
    pub error: f64,
    pub estimator: Estimator,
}

impl CorrelationEstimate {
    /// Disagreement beyond five combined error bars.
    pub fn inconsistent_with(&self, other: &CorrelationEstimate) -> bool {
        (self.value - other.value).norm() > 5.0 * (self.error + other.error)
    }
}

/// `C(t) = ⟨f∘T^t, g⟩` on the uniform grid `t = j·step`, `j = 0, …, lags`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub step: f64,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub estimator: Estimator,
}

impl CorrelationSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at signed lag `j`; negative lags use `C(−t) = conj C(t)`.
    pub fn at(&self, j: i64) -> Complex64 {
        let v = self.values[j.unsigned_abs() as usize];
        if j < 0 {
            v.conj()
        } else {
            v
        }
    }

    /// Mean of `|C(t)|` over lags `1..`.
    pub fn cesaro_abs(&self) -> f64 {
        if self.values.len() < 2 {
            return 0.0;
        }
        self.values[1..].iter().map(|v| v.norm()).sum::<f64>() / (self.values.len() - 1) as f64
    }

    /// `t,value_re,value_im,error` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        use crate::report::fmt_f64;
        let mut s = String::from("t,value_re,value_im,error\n");
        for (j, (v, e)) in self.values.iter().zip(&self.errors).enumerate() {
            s.push_str(&format!("{},{},{},{}\n", fmt_f64(j as f64 * self.step), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(*e)));
        }
        s
    }
}

/// Validates a uniform grid `0, h, 2h, …` and returns `(h, lags)`.
pub fn uniform_grid(t: &[f64]) -> Result<(f64, usize)> {
    if t.len() < 2 || t[0] != 0.0 {
        return Err(Error::InvalidInput("time grid must start at 0 and have at least two points".into()));
    }
    let h = t[1] - t[0];
    if !(h > 0.0) {
        return Err(Error::InvalidInput("time grid step must be positive".into()));
    }
    for (j, &tj) in t.iter().enumerate() {
        if (tj - j as f64 * h).abs() > 1e-9 * h.max(1.0) * (j as f64).max(1.0) {
            return Err(Error::InvalidInput(format!("time grid is not uniform at index {j}")));
        }
    }
    Ok((h, t.len() - 1))
}

struct GridNode {
    p: FlowPoint,
    w: f64,
    coarse: bool,
}

fn grid_nodes(chi: FiberBump, opts: &CorrelationOptions) -> Vec<GridNode> {
    let (gx, gy) = (opts.grid_x.max(2), opts.grid_y.max(2));
    let (sx, sw) = gauss_legendre(opts.fiber_nodes.max(1));
    let half = 0.5 * (chi.hi - chi.lo);
    let mut out = Vec::with_capacity(gx * gy * sx.len());
    for i in 0..gx {
        for j in 0..gy {
            let base = TorusPoint::new(to_fixed((i as f64 + 0.5) / gx as f64), to_fixed((j as f64 + 0.5) / gy as f64));
            for (xs, ws) in sx.iter().zip(&sw) {
                let s = chi.lo + half * (xs + 1.0);
                out.push(GridNode {
                    p: FlowPoint { base, s },
                    w: ws * half / (gx * gy) as f64,
                    coarse: i % 2 == 0 && j % 2 == 0,
                });
            }
        }
    }
    out
}

/// Grid-quadrature series for every pair `(fs[a], fs[a])`; the error is the
/// difference to the rule on every second node in `x` and `y`.
pub fn grid_series(fs: &[Observable], eng: &FlowEngine, step: f64, lags: usize, opts: &CorrelationOptions) -> Result<Vec<CorrelationSeries>> {
    if fs.is_empty() {
        return Ok(Vec::new());
    }
    let chi = fs[0].chi();
    if fs.iter().any(|f| f.chi() != chi) {
        return Err(Error::InvalidInput("grid series needs a common fiber bump".into()));
    }
    let nodes = grid_nodes(chi, opts);
    let width = lags + 1;
    let blank = || vec![NeumaierC::new(); 2 * fs.len() * width];
    // Fixed chunking keeps the reduction order independent of the thread count.
    let partial: Vec<Vec<NeumaierC>> = nodes
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = blank();
            for node in chunk {
                let orbit = eng.step_orbit(node.p, step, width);
                for (a, f) in fs.iter().enumerate() {
                    let g0 = f.eval(node.p).conj();
                    if g0 == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (j, q) in orbit.iter().enumerate() {
                        let v = f.eval(*q) * g0;
                        acc[(2 * a) * width + j].add(v * node.w);
                        if node.coarse {
                            acc[(2 * a + 1) * width + j].add(v * (4.0 * node.w));
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = blank();
    for part in partial {
        for (t, p) in total.iter_mut().zip(part) {
            t.add(p.value());
        }
    }
    Ok((0..fs.len())
        .map(|a| {
            let fine: Vec<Complex64> = (0..width).map(|j| total[2 * a * width + j].value()).collect();
            let errors = (0..width).map(|j| (fine[j] - total[(2 * a + 1) * width + j].value()).norm()).collect();
            CorrelationSeries { step, values: fine, errors, estimator: Estimator::Grid }
        })
        .collect())
}

/// A point distributed according to `μ` (uniform under the graph of `φ`).
pub fn sample_mu<R: Rng>(eng: &FlowEngine, rng: &mut R) -> FlowPoint {
    loop {
        let base = TorusPoint::new(rng.random(), rng.random());
        let s = rng.random::<f64>() * eng.sup();
        if s < eng.phi(base) {
            return FlowPoint { base, s };
        }
    }
}

/// `r[t] = Σ_τ a[τ+t]·conj(b[τ])` for `t ≤ lags`, by zero-padded FFT.
fn cross_correlate(a: &[Complex64], b: &[Complex64], lags: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let n = (a.len() + lags + 1).next_power_of_two();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fa: Vec<Complex64> = a.iter().copied().chain(std::iter::repeat(Complex64::new(0.0, 0.0))).take(n).collect();
    let mut fb: Vec<Complex64> = b.iter().copied().chain(std::iter::repeat(Complex64::new(0.0, 0.0))).take(n).collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y.conj()).collect();
    inv.process(&mut prod);
    prod.truncate(lags + 1);
    prod.iter().map(|v| v / n as f64).collect()
}

/// Orbit-average series for each observable with batch-means errors.
pub fn orbit_series(fs: &[Observable], eng: &FlowEngine, step: f64, lags: usize, opts: &CorrelationOptions) -> Result<Vec<CorrelationSeries>> {
    let batches = opts.batches.max(2);
    let len = opts.orbit_len / batches;
    if len <= lags {
        return Err(Error::InvalidInput(format!("orbit batch length {len} does not exceed the lag count {lags}")));
    }
    let per_batch: Vec<Vec<Vec<Complex64>>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(opts.seed, 0x0b17 + b as u64);
            let p = sample_mu(eng, &mut rng);
            let orbit = eng.step_orbit(p, step, len);
            let mut planner = FftPlanner::new();
            fs.iter()
                .map(|f| {
                    let v: Vec<Complex64> = orbit.iter().map(|q| f.eval(*q)).collect();
                    let r = cross_correlate(&v, &v, lags, &mut planner);
                    r.iter().enumerate().map(|(t, x)| x / (len - t) as f64).collect()
                })
                .collect()
        })
        .collect();
    Ok((0..fs.len())
        .map(|a| {
            let mut values = Vec::with_capacity(lags + 1);
            let mut errors = Vec::with_capacity(lags + 1);
            for t in 0..=lags {
                let xs: Vec<Complex64> = per_batch.iter().map(|b| b[a][t]).collect();
                let mean = xs.iter().sum::<Complex64>() / batches as f64;
                let var = xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (batches - 1) as f64;
                values.push(mean);
                errors.push((var / batches as f64).sqrt());
            }
            CorrelationSeries { step, values, errors, estimator: Estimator::Orbit }
        })
        .collect())
}

/// `C(j·step)` for `j = 0, …, lags` of a single observable.
pub fn autocorrelation_series(f: &Observable, t_grid: &[f64], eng: &FlowEngine, estimator: Estimator, opts: &CorrelationOptions) -> Result<CorrelationSeries> {
    let (h, lags) = uniform_grid(t_grid)?;
    let fs = std::slice::from_ref(f);
    let mut out = match estimator {
        Estimator::Grid => grid_series(fs, eng, h, lags, opts)?,
        Estimator::Orbit => orbit_series(fs, eng, h, lags, opts)?,
    };
    Ok(out.remove(0))
}

/// `⟨f∘T^t, g⟩_μ` at one time `t ≥ 0`.
///
/// The grid estimator advances each node by the exact flow; the orbit
/// estimator needs an integer `t` and walks unit steps.
pub fn correlation(f: &Observable, g: &Observable, t: f64, eng: &FlowEngine, estimator: Estimator, opts: &CorrelationOptions) -> Result<CorrelationEstimate> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("correlation time {t} must be >= 0")));
    }
    match estimator {
        Estimator::Grid => {
            let nodes = grid_nodes(g.chi(), opts);
            let vals: Vec<(Complex64, bool, f64)> = nodes
                .par_iter()
                .map(|node| {
                    let g0 = g.eval(node.p).conj();
                    if g0 == Complex64::new(0.0, 0.0) {
                        return Ok((Complex64::new(0.0, 0.0), node.coarse, node.w));
                    }
                    let q = eng.advance(node.p, t)?;
                    Ok((f.eval(q) * g0, node.coarse, node.w))
                })
                .collect::<Result<_>>()?;
            let (mut fine, mut coarse) = (NeumaierC::new(), NeumaierC::new());
            for (v, c, w) in vals {
                fine.add(v * w);
                if c {
                    coarse.add(v * (4.0 * w));
                }
            }
            Ok(CorrelationEstimate { value: fine.value(), error: (fine.value() - coarse.value()).norm(), estimator })
        }
        Estimator::Orbit => {
            if t.fract() != 0.0 {
                return Err(Error::InvalidInput("orbit estimator needs an integer time".into()));
            }
            let lag = t as usize;
            let batches = opts.batches.max(2);
            let len = opts.orbit_len / batches;
            if len <= lag {
                return Err(Error::InvalidInput(format!("orbit batch length {len} does not exceed t={lag}")));
            }
            let xs: Vec<Complex64> = (0..batches)
                .into_par_iter()
                .map(|b| {
                    let mut rng = stream(opts.seed, 0x0b17 + b as u64);
                    let orbit = eng.step_orbit(sample_mu(eng, &mut rng), 1.0, len);
                    let mut acc = NeumaierC::new();
                    for tau in 0..len - lag {
                        acc.add(f.eval(orbit[tau + lag]) * g.eval(orbit[tau]).conj());
                    }
                    acc.value() / (len - lag) as f64
                })
                .collect();
            let mean = xs.iter().sum::<Complex64>() / batches as f64;
            let var = xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (batches - 1) as f64;
            Ok(CorrelationEstimate { value: mean, error: (var / batches as f64).sqrt(), estimator })
        }
    }
}

/// Exact autocorrelation of `e(k·z)·χ(s)` under the unit ceiling.
///
/// With `t = w + u`, `u ∈ [0, 1)`, the fiber wraps at most once, so
/// `C(t) = e(w·k·α)·A(u) + e((w+1)·k·α)·B(u)` with `A, B` overlap integrals of `χ`.
pub fn pure_point_oracle(k: [i128; 2], tv: &TranslationVector, t: FlowTime, chi: FiberBump) -> Complex64 {
    let turns = |n: i128| -> f64 {
        let (rx, ry) = (tv.rotation(Axis::X), tv.rotation(Axis::Y));
        let nb = BigInt::from(n);
        let a = rx.turns(&rx.residue(&(&nb * k[0])));
        let b = ry.turns(&ry.residue(&(&nb * k[1])));
        a + b
    };
    let e = |th: f64| expm1_turns(th) + 1.0;
    let u = t.frac;
    // On the overlap of the two supports the integrand is a degree-12 polynomial.
    let overlap = |shift: f64| {
        let (a, b) = (chi.lo.max(chi.lo - shift), chi.hi.min(chi.hi - shift));
        if b <= a {
            return 0.0;
        }
        crate::numeric::quad::integrate(|s| chi.eval(s + shift) * chi.eval(s), a, b, 8, 1)
    };
    let a = if u == 0.0 { chi.norm_sq() } else { overlap(u) };
    let b = overlap(u - 1.0);
    e(turns(t.whole)) * a + e(turns(t.whole + 1)) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceiling::{CeilingFunction, Regime};
    use crate::spectral::observable::FiberBump;

    fn golden() -> TranslationVector {
        TranslationVector::from_u64(&[0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1], &[0, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2], 128).unwrap()
    }

    #[test]
    fn grid_rejects_nonuniform_times() {
        assert!(uniform_grid(&[0.0, 1.0, 2.5]).is_err());
        assert_eq!(uniform_grid(&[0.0, 0.5, 1.0]).unwrap(), (0.5, 2));
    }

    #[test]
    fn unit_ceiling_grid_matches_oracle() {
        let tv = golden();
        let eng = FlowEngine::new(&CeilingFunction::constant_one(Regime::exponential()), &tv).unwrap();
        let chi = FiberBump::for_floor(1.0).unwrap();
        let f = Observable::character([1, 0], chi).unwrap();
        let opts = CorrelationOptions { grid_x: 8, grid_y: 4, fiber_nodes: 8, ..Default::default() };
        for t in [0.0, 3.0, 40.0] {
            let est = correlation(&f, &f, t, &eng, Estimator::Grid, &opts).unwrap();
            let exact = pure_point_oracle([1, 0], &tv, FlowTime::from_f64(t), chi);
            assert!((est.value - exact).norm() < 1e-12, "t={t} {} vs {exact}", est.value);
        }
    }

    #[test]
    fn oracle_modulus_is_constant_at_integer_times() {
        let tv = golden();
        let chi = FiberBump::for_floor(1.0).unwrap();
        for t in [0, 1, 17, 1000] {
            let v = pure_point_oracle([1, 1], &tv, FlowTime::from_int(t), chi);
            assert!((v.norm() - chi.norm_sq()).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_correlation_matches_direct_sum() {
        let a: Vec<Complex64> = (0..50).map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos())).collect();
        let r = cross_correlate(&a, &a, 5, &mut FftPlanner::new());
        for t in 0..=5 {
            let direct: Complex64 = (0..50 - t).map(|i| a[i + t] * a[i].conj()).sum();
            assert!((r[t] - direct).norm() < 1e-12);
        }
    }
}
