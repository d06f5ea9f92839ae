//! The special flow `T^t` over `R_{α,α′}` under the ceiling `φ`.
//!
//! `T^t(z, s) = (R^N z, s + t − S_Nφ(z))` with `N` the largest index such
//! that `S_Nφ(z) ≤ s + t`. `N` is found by bracketing with `inf φ`, `sup φ`
//! and a bitwise search whose probes only add precomputed residues.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use super::birkhoff::{AxisKernel, PreparedKernel};
use super::torus::{translate_exact, TorusPoint};
use crate::arithmetic::{Axis, Residue, TranslationVector};
use crate::ceiling::CeilingFunction;
use crate::error::{Error, Result};
use crate::trig::{Lattice1D, TrigPolynomial};

/// A point `(z, s)` of the suspension, `0 ≤ s < φ(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPoint {
    pub base: TorusPoint,
    pub s: f64,
}

/// A time `whole + frac` with `frac ∈ [0, 1)`, exact beyond `2^53`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowTime {
    pub whole: i128,
    pub frac: f64,
}

impl FlowTime {
    pub fn from_f64(t: f64) -> Self {
        let w = t.floor();
        Self { whole: w as i128, frac: t - w }
    }

    pub fn from_int(n: i128) -> Self {
        Self { whole: n, frac: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.whole as f64 + self.frac
    }

    pub fn add_f64(self, s: f64) -> Self {
        let w = s.floor();
        let mut out = Self { whole: self.whole + w as i128, frac: self.frac + (s - w) };
        if out.frac >= 1.0 {
            out.frac -= 1.0;
            out.whole += 1;
        }
        out
    }

    pub fn is_negative(self) -> bool {
        self.whole < 0
    }
}

/// Geometric sum kernels of `φ − 1` in both directions.
#[derive(Debug, Clone)]
pub struct FlowEngine {
    tv: TranslationVector,
    fwd: [AxisKernel; 2],
    back: [AxisKernel; 2],
    x_levels: Vec<(Option<Lattice1D>, TrigPolynomial)>,
    y_part: TrigPolynomial,
    inf: f64,
    sup: f64,
}

struct Search<'a> {
    kernels: &'a [AxisKernel; 2],
    prepared: [PreparedKernel; 2],
}

impl<'a> Search<'a> {
    fn new(kernels: &'a [AxisKernel; 2], z: TorusPoint) -> Self {
        Self { kernels, prepared: [kernels[0].prepare(z.x), kernels[1].prepare(z.y)] }
    }

    /// `S_nφ(z) − n` for the residues of `n`.
    fn fluct(&self, res: &[Vec<Residue>; 2], n: f64) -> f64 {
        self.kernels[0].sum_prepared(&self.prepared[0], &res[0], n).re + self.kernels[1].sum_prepared(&self.prepared[1], &res[1], n).re
    }

    fn residues(&self, n: &BigUint) -> [Vec<Residue>; 2] {
        [self.kernels[0].residues(n), self.kernels[1].residues(n)]
    }
}

impl FlowEngine {
    pub fn new(cf: &CeilingFunction, tv: &TranslationVector) -> Result<Self> {
        if !(cf.inf_bound > 0.0) {
            return Err(Error::CorruptedCeiling(format!("inf bound {} is not positive", cf.inf_bound)));
        }
        let mut xs = TrigPolynomial::zero(1);
        let mut ys = TrigPolynomial::zero(1);
        let x_levels = cf.levels.iter().map(|l| (l.xt.lattice(), l.xt.clone())).collect();
        for l in &cf.levels {
            xs = xs.add(&l.xt)?;
            ys = ys.add(&l.y)?;
        }
        let k = |p: &TrigPolynomial, a: Axis, r: bool| AxisKernel::new(p, a, tv, r);
        Ok(Self {
            tv: tv.clone(),
            fwd: [k(&xs, Axis::X, false), k(&ys, Axis::Y, false)],
            back: [k(&xs, Axis::X, true), k(&ys, Axis::Y, true)],
            x_levels,
            y_part: ys,
            inf: cf.inf_bound,
            sup: cf.sup_bound,
        })
    }

    pub fn translation(&self) -> &TranslationVector {
        &self.tv
    }

    pub fn inf(&self) -> f64 {
        self.inf
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// `φ(z)`.
    pub fn phi(&self, z: TorusPoint) -> f64 {
        let x: f64 = self
            .x_levels
            .iter()
            .map(|(lat, p)| match lat {
                Some(l) => l.eval(z.x).re,
                None => p.eval(z.x, 0).re,
            })
            .sum();
        1.0 + x + self.y_part.eval(z.y, 0).re
    }

    /// `S_nφ(z) − n` by the geometric method.
    pub fn fluctuation(&self, z: TorusPoint, n: &BigUint) -> f64 {
        let s = Search::new(&self.fwd, z);
        s.fluct(&s.residues(n), n.to_f64().unwrap_or(f64::INFINITY))
    }

    /// `S_nφ(z)` in double precision.
    pub fn birkhoff(&self, z: TorusPoint, n: u64) -> f64 {
        n as f64 + self.fluctuation(z, &BigUint::from(n))
    }

    /// Largest `n ≥ 0` with `τ − n − F(n) ≥ 0` (or `> 0` when `strict`), where
    /// `F(n) = Σ_{l<n} (φ − 1)(z ± lα)`; returns `n` and the remainder.
    fn search(&self, kernels: &[AxisKernel; 2], z: TorusPoint, tau: FlowTime, strict: bool) -> Result<(BigUint, f64)> {
        let s = Search::new(kernels, z);
        let rem = |n: &BigUint, res: &[Vec<Residue>; 2]| -> f64 {
            let ni = BigInt::from(n.clone());
            let d = (BigInt::from(tau.whole) - ni).to_f64().unwrap_or(f64::NEG_INFINITY);
            d + tau.frac - s.fluct(res, n.to_f64().unwrap_or(f64::INFINITY))
        };
        let ok = |r: f64| if strict { r > 0.0 } else { r >= 0.0 };
        let t = tau.to_f64();
        let slack = 2.0 + t.abs() * 1e-12;
        let mut lo = BigUint::from(((t / self.sup - slack).max(0.0)).floor() as u128);
        let mut hi = BigUint::from(((t / self.inf + slack).max(1.0)).ceil() as u128 + 1);
        let mut res_lo = s.residues(&lo);
        let mut r_lo = rem(&lo, &res_lo);
        while !ok(r_lo) {
            if lo.is_zero() {
                return Err(Error::CorruptedCeiling(format!("negative remainder {r_lo:e} at n=0")));
            }
            lo >>= 1;
            res_lo = s.residues(&lo);
            r_lo = rem(&lo, &res_lo);
        }
        let mut guard = 0;
        while ok(rem(&hi, &s.residues(&hi))) {
            hi <<= 1;
            guard += 1;
            if guard > 8 {
                return Err(Error::CorruptedCeiling("Birkhoff sums fail to exceed the target".into()));
            }
        }
        // Invariant: ok(lo), !ok(hi).
        let width = &hi - &lo;
        let bits = width.bits();
        let pw = [kernels[0].power_residues(bits), kernels[1].power_residues(bits)];
        let (mut cur, mut res, mut r_cur) = (lo, res_lo, r_lo);
        for b in (0..bits as usize).rev() {
            let cand = &cur + (BigUint::from(1u8) << b);
            if cand >= hi {
                continue;
            }
            let rc = [kernels[0].add_residues(&res[0], &pw[0][b]), kernels[1].add_residues(&res[1], &pw[1][b])];
            let r = rem(&cand, &rc);
            if ok(r) {
                cur = cand;
                res = rc;
                r_cur = r;
            }
        }
        Ok((cur, r_cur))
    }

    /// `T^τ p` for an exact time.
    pub fn advance_time(&self, p: FlowPoint, t: FlowTime) -> Result<FlowPoint> {
        let tau = t.add_f64(p.s);
        if !tau.is_negative() {
            let (n, mut s) = self.search(&self.fwd, p.base, tau, false)?;
            let mut base = translate_exact(p.base, &BigInt::from(n), &self.tv);
            // Rounding can leave the remainder at the fiber top; roll over.
            let top = self.phi(base);
            if s >= top {
                s -= top;
                base = translate_exact(base, &BigInt::from(1), &self.tv);
            }
            Ok(FlowPoint { base, s: s.max(0.0) })
        } else {
            // Backward: smallest N ≥ 1 with τ + Σ_{l=1}^{N} φ(z − lα) ≥ 0.
            let start = translate_exact(p.base, &BigInt::from(-1), &self.tv);
            let neg = FlowTime { whole: -tau.whole - 1, frac: 1.0 - tau.frac };
            let neg = if neg.frac >= 1.0 { FlowTime { whole: neg.whole + 1, frac: 0.0 } } else { neg };
            let (n, r) = self.search(&self.back, start, neg, true)?;
            let n1 = BigInt::from(n) + 1;
            let base = translate_exact(p.base, &(-&n1), &self.tv);
            // r = −τ − B_n > 0, so s = φ(base) − r.
            let s = self.phi(base) - r;
            Ok(FlowPoint { base, s: s.max(0.0) })
        }
    }

    pub fn advance(&self, p: FlowPoint, t: f64) -> Result<FlowPoint> {
        self.advance_time(p, FlowTime::from_f64(t))
    }

    /// `p, T^h p, …, T^{(len−1)h} p` by walking fiber by fiber (`h > 0`).
    ///
    /// Suited to short steps over long horizons; the base point accumulates
    /// one fixed-point rounding of `α` per fiber.
    pub fn step_orbit(&self, p: FlowPoint, h: f64, len: usize) -> Vec<FlowPoint> {
        let (ax, ay) = (self.tv.rotation(Axis::X).fixed(), self.tv.rotation(Axis::Y).fixed());
        let mut out = Vec::with_capacity(len);
        let (mut z, mut s) = (p.base, p.s);
        let mut top = self.phi(z);
        for i in 0..len {
            if i > 0 {
                s += h;
                while s >= top {
                    s -= top;
                    z = z.shift(ax, ay);
                    top = self.phi(z);
                }
            }
            out.push(FlowPoint { base: z, s });
        }
        out
    }

    /// Distance on `M`: max-metric on `(z, s)`, minimized over the fiber identification.
    pub fn distance(&self, a: FlowPoint, b: FlowPoint) -> f64 {
        let d0 = a.base.dist(b.base).max((a.s - b.s).abs());
        let one = BigInt::from(1);
        let ra = translate_exact(a.base, &one, &self.tv);
        let rb = translate_exact(b.base, &one, &self.tv);
        let d1 = ra.dist(b.base).max((a.s - self.phi(a.base) - b.s).abs());
        let d2 = a.base.dist(rb).max((a.s - (b.s - self.phi(b.base))).abs());
        d0.min(d1).min(d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceiling::Regime;
    use crate::presets;
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
    fn unit_ceiling_moves_linearly() {
        let (tv, _) = desk();
        let eng = FlowEngine::new(&CeilingFunction::constant_one(Regime::exponential()), tv).unwrap();
        let z = TorusPoint::from_f64(0.25, 0.5);
        let q = eng.advance(FlowPoint { base: z, s: 0.0 }, 2.5).unwrap();
        assert_eq!(q.base, translate_exact(z, &BigInt::from(2), tv));
        assert!((q.s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn one_full_fiber() {
        let (tv, cf) = desk();
        let eng = FlowEngine::new(cf, tv).unwrap();
        let z = TorusPoint::from_f64(0.3125, 0.71);
        let q = eng.advance(FlowPoint { base: z, s: 0.0 }, eng.phi(z)).unwrap();
        assert_eq!(q.base, translate_exact(z, &BigInt::from(1), tv));
        assert!(q.s < 1e-14);
    }

    #[test]
    fn semigroup_and_inverse() {
        let (tv, cf) = desk();
        let eng = FlowEngine::new(cf, tv).unwrap();
        let p = FlowPoint { base: TorusPoint::from_f64(0.61, 0.13), s: 0.4 };
        let a = eng.advance(eng.advance(p, 123.25).unwrap(), 400.5).unwrap();
        let b = eng.advance(p, 523.75).unwrap();
        assert!(eng.distance(a, b) < 1e-9, "{a:?} {b:?}");
        let back = eng.advance(b, -523.75).unwrap();
        assert!(eng.distance(back, p) < 1e-9, "{back:?}");
    }

    #[test]
    fn huge_integer_time() {
        let (tv, cf) = desk();
        let eng = FlowEngine::new(cf, tv).unwrap();
        let p = FlowPoint { base: TorusPoint::from_f64(0.0021, 0.3), s: 0.5 };
        let t = FlowTime::from_int(432001i128 * 5598745920121);
        let q = eng.advance_time(p, t).unwrap();
        assert!(q.s >= 0.0 && q.s < eng.phi(q.base));
    }
}
