//! Assembly of `φ(x, y) = 1 + Σₙ X̃ₙ(x) + Yₙ(y)`.

use num_bigint::BigInt;
use rayon::prelude::*;

use super::build::{transfer_build, truncate, y_build, TransferFunction};
use super::profile::{hat_x_build, BumpProfileLevel};
use super::regime::Regime;
use crate::arithmetic::{Axis, TranslationVector};
use crate::error::{Error, Result};
use crate::trig::{Lattice1D, TrigPolynomial};

/// Everything built for level `n`.
#[derive(Debug, Clone)]
pub struct CeilingLevel {
    pub n: usize,
    pub nu: f64,
    pub q: BigInt,
    pub qp: BigInt,
    pub q_next: BigInt,
    pub eps: f64,
    pub eps_p: f64,
    pub profile: BumpProfileLevel,
    pub hat: TrigPolynomial,
    /// `X̃ₙ`, empty when the `x`-part is switched off.
    pub xt: TrigPolynomial,
    pub psi: TransferFunction,
    /// `Yₙ`, empty when the `y`-part is switched off.
    pub y: TrigPolynomial,
    xt_lattice: Option<Lattice1D>,
}

impl CeilingLevel {
    pub fn xt_eval(&self, x: u128) -> f64 {
        match &self.xt_lattice {
            Some(l) => l.eval(x).re,
            None => self.xt.eval(x, 0).re,
        }
    }

    pub fn y_eval(&self, y: u128) -> f64 {
        self.y.eval(y, 0).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssembleOptions {
    pub include_x: bool,
    pub include_y: bool,
    /// Positivity grid has `2^grid_bits` points per axis.
    pub grid_bits: u32,
    /// Fixed profile grid exponent; `None` adapts.
    pub hat_grid: Option<u32>,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self { include_x: true, include_y: true, grid_bits: 12, hat_grid: None }
    }
}

/// The ceiling `φ` with its per-level data.
#[derive(Debug, Clone)]
pub struct CeilingFunction {
    pub n0: usize,
    pub n_max: usize,
    pub regime: Regime,
    pub levels: Vec<CeilingLevel>,
    /// Certified lower bound on `φ` from the positivity check.
    pub inf_bound: f64,
    /// Upper bound on `φ`.
    pub sup_bound: f64,
}

impl CeilingFunction {
    /// The control ceiling `φ ≡ 1`.
    pub fn constant_one(regime: Regime) -> Self {
        Self { n0: 1, n_max: 0, regime, levels: Vec::new(), inf_bound: 1.0, sup_bound: 1.0 }
    }

    pub fn is_constant(&self) -> bool {
        self.levels.iter().all(|l| l.xt.is_empty() && l.y.is_empty())
    }

    pub fn level(&self, n: usize) -> Option<&CeilingLevel> {
        self.levels.iter().find(|l| l.n == n)
    }

    /// `Σₙ X̃ₙ(x)`.
    pub fn x_part(&self, x: u128) -> f64 {
        self.levels.iter().map(|l| l.xt_eval(x)).sum()
    }

    /// `Σₙ Yₙ(y)`.
    pub fn y_part(&self, y: u128) -> f64 {
        self.levels.iter().map(|l| l.y_eval(y)).sum()
    }

    pub fn eval(&self, x: u128, y: u128) -> f64 {
        1.0 + self.x_part(x) + self.y_part(y)
    }

    /// `(∂ₓφ, ∂ᵧφ)`.
    pub fn grad(&self, x: u128, y: u128) -> (f64, f64) {
        let dx = self.levels.iter().map(|l| l.xt.derivative(0, 1).eval(x, 0).re).sum();
        let dy = self.levels.iter().map(|l| l.y.derivative(0, 1).eval(y, 0).re).sum();
        (dx, dy)
    }

    /// `φ − 1` as one 2-D polynomial (all levels).
    pub fn fluctuation(&self) -> Result<TrigPolynomial> {
        let mut acc = TrigPolynomial::zero(2);
        for l in &self.levels {
            acc = acc.add(&l.xt.lift(0))?.add(&l.y.lift(1))?;
        }
        Ok(acc)
    }

    /// Mean of `φ` from the zero-frequency coefficients.
    pub fn mean(&self) -> f64 {
        1.0 + self.levels.iter().map(|l| (l.xt.mean() + l.y.mean()).re).sum::<f64>()
    }

    /// Coefficient table rows `(level, axis, k₁, k₂, re, im)`.
    pub fn coefficient_rows(&self) -> Vec<(usize, Axis, i128, i128, f64, f64)> {
        let mut rows = Vec::new();
        for l in &self.levels {
            for t in l.xt.terms() {
                rows.push((l.n, Axis::X, t.k[0], 0, t.c.re, t.c.im));
            }
            for t in l.y.terms() {
                rows.push((l.n, Axis::Y, 0, t.k[0], t.c.re, t.c.im));
            }
        }
        rows
    }
}

fn build_level(tv: &TranslationVector, regime: &Regime, n: usize, opts: &AssembleOptions) -> Result<CeilingLevel> {
    let missing = |what: &str| Error::Precondition(format!("{what} missing for level {n}"));
    let q = tv.q(n).ok_or_else(|| missing("q"))?.clone();
    let qp = tv.qp(n).ok_or_else(|| missing("q'"))?.clone();
    let q_next = tv.q(n + 1).ok_or_else(|| missing("q_{n+1}"))?.clone();
    let eps = regime.eps(&q);
    let eps_p = regime.eps_p(&qp);
    let nu = regime.nu(n);
    let profile = BumpProfileLevel::new(n, q.clone(), regime.amp_factor * eps, nu)?;
    let wrap = |e: Error| Error::Assembly { level: n, reason: e.to_string() };
    let (hat, xt) = if opts.include_x {
        let hat = hat_x_build(&profile, opts.hat_grid).map_err(wrap)?;
        let xt = truncate(&hat, &q_next)?;
        (hat, xt)
    } else {
        (TrigPolynomial::zero(1), TrigPolynomial::zero(1))
    };
    let psi = transfer_build(&xt, tv.rotation(Axis::X), &q_next).map_err(wrap)?;
    let y = if opts.include_y { y_build(&qp, eps_p).map_err(wrap)? } else { TrigPolynomial::zero(1) };
    let xt_lattice = xt.lattice();
    Ok(CeilingLevel { n, nu, q, qp, q_next, eps, eps_p, profile, hat, xt, psi, y, xt_lattice })
}

/// Grid minimum and maximum of `f` on `2^bits` points, widened by `h/2·lip`.
fn grid_range(bits: u32, lip: f64, f: impl Fn(u128) -> f64 + Sync) -> (f64, f64) {
    let n = 1u64 << bits;
    let shift = 128 - bits;
    let (lo, hi) = (0..n)
        .into_par_iter()
        .map(|i| {
            let v = f((i as u128) << shift);
            (v, v)
        })
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    let slack = 0.5 / n as f64 * lip;
    (lo - slack, hi + slack)
}

/// Builds levels `n₀..=n_max` and certifies `φ > 0`.
///
/// Positivity: `φ` is separable, so its minimum over the product grid is the
/// sum of the `x`- and `y`-minima; a Lipschitz bound from the Fourier
/// coefficients covers points between grid nodes.
pub fn ceiling_assemble(
    tv: &TranslationVector,
    regime: &Regime,
    n0: usize,
    n_max: usize,
    opts: &AssembleOptions,
) -> Result<CeilingFunction> {
    if n0 == 0 || n0 > n_max || n_max > tv.levels() {
        return Err(Error::Precondition(format!(
            "need 1 <= n0={n0} <= n_max={n_max} <= available levels {}",
            tv.levels()
        )));
    }
    let levels: Vec<CeilingLevel> = (n0..=n_max)
        .into_par_iter()
        .map(|n| build_level(tv, regime, n, opts))
        .collect::<Result<_>>()?;
    let mut cf = CeilingFunction { n0, n_max, regime: regime.clone(), levels, inf_bound: 1.0, sup_bound: 1.0 };

    let mean_defect = cf.mean() - 1.0;
    if mean_defect != 0.0 {
        return Err(Error::Assembly { level: n0, reason: format!("mean off by {mean_defect:e}") });
    }

    // Cumulative check so that a failure names the first level that breaks positivity.
    let (mut lo, mut hi) = (1.0, 1.0);
    for i in 0..cf.levels.len() {
        let l = &cf.levels[i];
        let (xl, xh) = grid_range(opts.grid_bits, l.xt.weighted_l1(1), |x| l.xt_eval(x));
        let (yl, yh) = (-l.eps_p * l.y.len().min(1) as f64, l.eps_p * l.y.len().min(1) as f64);
        lo += xl + yl;
        hi += xh + yh;
        if lo <= 0.0 {
            return Err(Error::Assembly { level: l.n, reason: format!("positivity bound {lo:e} <= 0") });
        }
    }
    // A joint x-scan is sharper than the sum of per-level ranges.
    let lip: f64 = cf.levels.iter().map(|l| l.xt.weighted_l1(1)).sum();
    let (xl, xh) = grid_range(opts.grid_bits, lip, |x| cf.x_part(x));
    let ylo: f64 = cf.levels.iter().map(|l| if l.y.is_empty() { 0.0 } else { l.eps_p }).sum();
    cf.inf_bound = (1.0 + xl - ylo).max(lo);
    cf.sup_bound = (1.0 + xh + ylo).min(hi);
    if cf.inf_bound <= 0.0 {
        return Err(Error::Assembly { level: n_max, reason: format!("positivity bound {:e} <= 0", cf.inf_bound) });
    }
    Ok(cf)
}
