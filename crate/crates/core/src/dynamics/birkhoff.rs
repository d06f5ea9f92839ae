//! Birkhoff sums `S_m f(z) = Σ_{l<m} f(z + lα)` of trigonometric polynomials.
//!
//! The geometric method sums each Fourier mode in closed form,
//! `Σ_{l<m} e(lθ) = sin(πφ)/sin(πθ)·e((φ − θ)/2)` with `θ = {kα}` and
//! `φ = {kmα}` both reduced exactly from integer residues, so the result is
//! relatively accurate per mode even when `θ` is of order `1/q_N`.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use super::torus::TorusPoint;
use crate::arithmetic::{Axis, Residue, Rotation, TranslationVector};
use crate::error::{Error, Result};
use crate::numeric::fixed::cis_fixed;
use crate::numeric::sum::NeumaierC;
use crate::trig::{phase, Term, TrigPolynomial};

/// Largest `m` accepted by the orbit-iterating methods.
pub const ITERATE_CAP: u64 = 100_000_000;

/// Mixed-frequency phases below this modulus are not resolved by `f64`
/// addition of the two axis phases; such sums fall back to iteration.
pub const MIXED_PHASE_FLOOR: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Naive,
    Compensated,
    Geometric,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Compensated => "compensated",
            Method::Geometric => "geometric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffResult {
    pub m: BigUint,
    pub value: Complex64,
    pub dx: Option<Complex64>,
    pub dy: Option<Complex64>,
    /// Method that produced the value.
    pub method: Method,
    /// Geometric evaluation was requested but an unresolved phase forced iteration.
    pub fell_back: bool,
}

/// `Σ_{l<m} e(lθ)` from the signed phases `θ = {kα}`, `φ = {kmα}`; `θ = 0` gives `m`.
pub fn geometric_factor(theta: f64, phi: f64, m: f64) -> Complex64 {
    if theta == 0.0 {
        return Complex64::new(m, 0.0);
    }
    let pi = std::f64::consts::PI;
    let ratio = (pi * phi).sin() / (pi * theta).sin();
    let (s, c) = (pi * (phi - theta)).sin_cos();
    Complex64::new(ratio * c, ratio * s)
}

fn wrap_half(t: f64) -> f64 {
    t - t.round()
}

fn axis_turns(rot: &Rotation, k: &BigInt) -> f64 {
    rot.turns(&rot.residue(k))
}

/// `(θ, φ)` for one mode, or `None` when a mixed phase is below the floor.
fn mode_phases(k: [i128; 2], m: &BigUint, tv: &TranslationVector) -> Option<(f64, f64)> {
    let (rx, ry) = (tv.rotation(Axis::X), tv.rotation(Axis::Y));
    let mb = BigInt::from(m.clone());
    let (k1, k2) = (BigInt::from(k[0]), BigInt::from(k[1]));
    match (k[0] == 0, k[1] == 0) {
        (true, true) => Some((0.0, 0.0)),
        (false, true) => Some((axis_turns(rx, &k1), axis_turns(rx, &(&k1 * &mb)))),
        (true, false) => Some((axis_turns(ry, &k2), axis_turns(ry, &(&k2 * &mb)))),
        (false, false) => {
            let (ax, ay) = (rx.residue(&k1), ry.residue(&k2));
            if ax.is_zero() && ay.is_zero() {
                return Some((0.0, 0.0));
            }
            let theta = wrap_half(rx.turns(&ax) + ry.turns(&ay));
            if theta.abs() < MIXED_PHASE_FLOOR {
                return None;
            }
            let phi = wrap_half(axis_turns(rx, &(&k1 * &mb)) + axis_turns(ry, &(&k2 * &mb)));
            Some((theta, phi))
        }
    }
}

/// `S_m f` as a trigonometric polynomial; `Err` lists an unresolved mixed mode.
pub fn birkhoff_polynomial(f: &TrigPolynomial, m: &BigUint, tv: &TranslationVector) -> Result<TrigPolynomial> {
    let mf = m.to_f64().unwrap_or(f64::INFINITY);
    let mut terms = Vec::with_capacity(f.len());
    for t in f.terms() {
        let (theta, phi) = mode_phases(t.k, m, tv)
            .ok_or_else(|| Error::SmallDivisor(format!("mixed phase of k={:?} below floor", t.k)))?;
        terms.push(Term { k: t.k, c: t.c * geometric_factor(theta, phi, mf) });
    }
    TrigPolynomial::from_terms(f.dim(), terms)
}

/// Orbit point `z + lα` from a running fixed-point step (error `≤ l·2^{−128}`).
fn orbit(z: TorusPoint, tv: &TranslationVector, m: u64, mut visit: impl FnMut(TorusPoint)) {
    let (ax, ay) = (tv.rotation(Axis::X).fixed(), tv.rotation(Axis::Y).fixed());
    let mut p = z;
    for _ in 0..m {
        visit(p);
        p = p.shift(ax, ay);
    }
}

fn iterate(f: &TrigPolynomial, z: TorusPoint, m: &BigUint, tv: &TranslationVector, compensated: bool, derivs: bool) -> Result<[Complex64; 3]> {
    let mu = m
        .to_u64()
        .filter(|&m| m <= ITERATE_CAP)
        .ok_or_else(|| Error::Capacity(format!("m={m} exceeds iteration cap {ITERATE_CAP}")))?;
    let fx = f.derivative(0, 1);
    let fy = f.derivative(1, 1);
    let mut acc = [NeumaierC::new(), NeumaierC::new(), NeumaierC::new()];
    let mut plain = [Complex64::new(0.0, 0.0); 3];
    orbit(z, tv, mu, |p| {
        let mut v = [f.eval(p.x, p.y), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        if derivs {
            v[1] = fx.eval(p.x, p.y);
            v[2] = fy.eval(p.x, p.y);
        }
        for i in 0..3 {
            if compensated {
                acc[i].add(v[i]);
            } else {
                plain[i] += v[i];
            }
        }
    });
    Ok(if compensated { [acc[0].value(), acc[1].value(), acc[2].value()] } else { plain })
}

/// `S_m f(z)` with derivative sums `D_x S_m f`, `D_y S_m f`.
pub fn birkhoff_sum(f: &TrigPolynomial, z: TorusPoint, m: &BigUint, tv: &TranslationVector, method: Method) -> Result<BirkhoffResult> {
    if m.is_zero() {
        return Err(Error::InvalidInput("Birkhoff sum needs m >= 1".into()));
    }
    let out = |v: [Complex64; 3], method, fell_back| BirkhoffResult {
        m: m.clone(),
        value: v[0],
        dx: Some(v[1]),
        dy: Some(v[2]),
        method,
        fell_back,
    };
    match method {
        Method::Naive => Ok(out(iterate(f, z, m, tv, false, true)?, method, false)),
        Method::Compensated => Ok(out(iterate(f, z, m, tv, true, true)?, method, false)),
        Method::Geometric => match birkhoff_polynomial(f, m, tv) {
            Ok(p) => {
                let v = [p.eval(z.x, z.y), p.derivative(0, 1).eval(z.x, z.y), p.derivative(1, 1).eval(z.x, z.y)];
                Ok(out(v, Method::Geometric, false))
            }
            Err(Error::SmallDivisor(_)) => Ok(out(iterate(f, z, m, tv, true, true)?, Method::Compensated, true)),
            Err(e) => Err(e),
        },
    }
}

/// One mode of an [`AxisKernel`].
#[derive(Debug, Clone)]
struct KernelMode {
    k: i128,
    c: Complex64,
    /// Residue of the step phase `±kα`.
    step: Residue,
    theta: f64,
}

/// Geometric Birkhoff sums of a 1-D polynomial along one axis, reusable across
/// `m` and points. A reversed kernel sums along `z − lα`.
#[derive(Debug, Clone)]
pub struct AxisKernel {
    rot: Rotation,
    modes: Vec<KernelMode>,
}

/// Per-point weights `cₖ e(kx) e(−θ/2)/sin(πθ)` (or `cₖ e(kx)` for `θ = 0`).
#[derive(Debug, Clone)]
pub struct PreparedKernel {
    weights: Vec<(Complex64, bool)>,
}

impl AxisKernel {
    pub fn new(p: &TrigPolynomial, axis: Axis, tv: &TranslationVector, reverse: bool) -> Self {
        let rot = tv.rotation(axis).clone();
        let modes = p
            .terms()
            .iter()
            .map(|t| {
                let k = t.k[0];
                let step = rot.residue_i128(if reverse { -k } else { k });
                let theta = rot.turns(&step);
                KernelMode { k, c: t.c, step, theta }
            })
            .collect();
        Self { rot, modes }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rot
    }

    pub fn prepare(&self, coord: u128) -> PreparedKernel {
        let pi = std::f64::consts::PI;
        let weights = self
            .modes
            .iter()
            .map(|md| {
                let e = md.c * cis_fixed(phase([md.k, 0], coord, 0));
                if md.step.is_zero() {
                    (e, true)
                } else {
                    let (s, c) = (-pi * md.theta).sin_cos();
                    (e * Complex64::new(c, s) / (pi * md.theta).sin(), false)
                }
            })
            .collect();
        PreparedKernel { weights }
    }

    /// Residues of the step phases times `m`.
    pub fn residues(&self, m: &BigUint) -> Vec<Residue> {
        self.modes.iter().map(|md| self.rot.mul(&md.step, m)).collect()
    }

    /// Residues of the step phases times `2^b` for `b < bits`.
    pub fn power_residues(&self, bits: u64) -> Vec<Vec<Residue>> {
        let mut cur: Vec<Residue> = self.modes.iter().map(|md| md.step.clone()).collect();
        let mut out = Vec::with_capacity(bits as usize);
        for _ in 0..bits {
            let next = cur.iter().map(|r| self.rot.add(r, r)).collect();
            out.push(std::mem::replace(&mut cur, next));
        }
        out
    }

    pub fn add_residues(&self, a: &[Residue], b: &[Residue]) -> Vec<Residue> {
        a.iter().zip(b).map(|(x, y)| self.rot.add(x, y)).collect()
    }

    /// `S_m p(coord)` from prepared weights and the residues of `m·step`.
    pub fn sum_prepared(&self, w: &PreparedKernel, res_m: &[Residue], m: f64) -> Complex64 {
        let pi = std::f64::consts::PI;
        let mut acc = NeumaierC::new();
        for ((wt, degenerate), r) in w.weights.iter().zip(res_m) {
            if *degenerate {
                acc.add(wt * m);
            } else {
                let phi = self.rot.turns(r);
                let (s, c) = (pi * phi).sin_cos();
                acc.add(wt * Complex64::new(c, s) * s);
            }
        }
        acc.value()
    }

    /// `S_m p(coord)` (or the reversed sum).
    pub fn sum(&self, coord: u128, m: &BigUint) -> Complex64 {
        let w = self.prepare(coord);
        self.sum_prepared(&w, &self.residues(m), m.to_f64().unwrap_or(f64::INFINITY))
    }
}
