//! Finite Fourier series on `𝕋¹` or `𝕋²`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::dd::{CDd, Dd};
use crate::numeric::fixed::{cis_fixed, signed_turns_dd};
use crate::numeric::sum::NeumaierC;

/// One Fourier mode `c·e(k₁x + k₂y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub k: [i128; 2],
    pub c: Complex64,
}

/// Sparse trigonometric polynomial; terms are sorted by frequency, unique and
/// nonzero. One-dimensional polynomials keep `k₂ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    dim: u8,
    terms: Vec<Term>,
}

impl TrigPolynomial {
    pub fn zero(dim: u8) -> Self {
        assert!(dim == 1 || dim == 2, "dimension must be 1 or 2");
        Self { dim, terms: Vec::new() }
    }

    /// Builds from arbitrary terms, summing repeated frequencies.
    pub fn from_terms(dim: u8, terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidInput(format!("dimension {dim} not supported")));
        }
        let mut v: Vec<Term> = terms.into_iter().collect();
        for t in &v {
            if dim == 1 && t.k[1] != 0 {
                return Err(Error::InvalidInput("second frequency in a 1-D polynomial".into()));
            }
            if !(t.c.re.is_finite() && t.c.im.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite coefficient at k={:?}", t.k)));
            }
        }
        v.sort_by_key(|t| t.k);
        let mut out: Vec<Term> = Vec::with_capacity(v.len());
        for t in v {
            match out.last_mut() {
                Some(last) if last.k == t.k => last.c += t.c,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.c != Complex64::new(0.0, 0.0));
        Ok(Self { dim, terms: out })
    }

    /// 1-D polynomial from `(k, c)` pairs.
    pub fn from_1d(pairs: impl IntoIterator<Item = (i128, Complex64)>) -> Result<Self> {
        Self::from_terms(1, pairs.into_iter().map(|(k, c)| Term { k: [k, 0], c }))
    }

    /// Real cosine `a·cos(2πkx)` in one variable.
    pub fn cosine(k: i128, a: f64) -> Self {
        let h = Complex64::new(0.5 * a, 0.0);
        Self::from_1d([(k, h), (-k, h)]).expect("finite amplitude")
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: [i128; 2]) -> Complex64 {
        match self.terms.binary_search_by(|t| t.k.cmp(&k)) {
            Ok(i) => self.terms[i].c,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Mean value (coefficient at frequency 0).
    pub fn mean(&self) -> Complex64 {
        self.coeff([0, 0])
    }

    /// Largest `max(|k₁|, |k₂|)`.
    pub fn max_freq(&self) -> i128 {
        self.terms.iter().map(|t| t.k[0].abs().max(t.k[1].abs())).max().unwrap_or(0)
    }

    /// Whether `c₋ₖ = conj(cₖ)` up to `tol·max|c|`.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.terms.iter().fold(0.0f64, |m, t| m.max(t.c.norm()));
        self.terms.iter().all(|t| (self.coeff([-t.k[0], -t.k[1]]) - t.c.conj()).norm() <= tol * scale)
    }

    /// Keeps the terms with `|k| < cutoff` (all components).
    pub fn truncate(&self, cutoff: i128) -> Self {
        let terms = self.terms.iter().copied().filter(|t| t.k[0].abs() < cutoff && t.k[1].abs() < cutoff).collect();
        Self { dim: self.dim, terms }
    }

    /// Replaces each coefficient by `f(k, c)`; zero results are dropped.
    pub fn map(&self, mut f: impl FnMut([i128; 2], Complex64) -> Complex64) -> Self {
        let mut terms: Vec<Term> = self.terms.iter().map(|t| Term { k: t.k, c: f(t.k, t.c) }).collect();
        terms.retain(|t| t.c != Complex64::new(0.0, 0.0));
        Self { dim: self.dim, terms }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|_, c| c * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let dim = self.dim.max(other.dim);
        Self::from_terms(dim, self.terms.iter().chain(other.terms.iter()).copied())
    }

    /// Lifts a 1-D polynomial in `x` (axis 0) or `y` (axis 1) to two dimensions.
    pub fn lift(&self, axis: usize) -> Self {
        assert_eq!(self.dim, 1);
        let terms = self
            .terms
            .iter()
            .map(|t| Term { k: if axis == 0 { [t.k[0], 0] } else { [0, t.k[0]] }, c: t.c })
            .collect();
        Self { dim: 2, terms }
    }

    /// `r`-th partial derivative along `axis`.
    pub fn derivative(&self, axis: usize, r: u32) -> Self {
        self.map(|k, c| c * Complex64::new(0.0, std::f64::consts::TAU * k[axis] as f64).powu(r))
    }

    /// `Σ (2π|k|)^r |cₖ|`, an upper bound for the sup norm of the `r`-th derivative.
    pub fn weighted_l1(&self, r: i32) -> f64 {
        self.terms.iter().map(|t| (std::f64::consts::TAU * knorm(t.k)).powi(r) * t.c.norm()).sum()
    }

    /// `sup_k (2π|k|)^r |cₖ|`.
    pub fn weighted_sup(&self, r: i32) -> f64 {
        self.terms.iter().fold(0.0f64, |m, t| m.max((std::f64::consts::TAU * knorm(t.k)).powi(r) * t.c.norm()))
    }

    /// Evaluation with an exact fixed-point phase per term and compensated summation.
    pub fn eval(&self, x: u128, y: u128) -> Complex64 {
        let mut acc = NeumaierC::new();
        for t in &self.terms {
            acc.add(t.c * cis_fixed(phase(t.k, x, y)));
        }
        acc.value()
    }

    pub fn eval_real(&self, x: u128, y: u128) -> f64 {
        self.eval(x, y).re
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> Complex64 {
        use crate::numeric::fixed::to_fixed;
        self.eval(to_fixed(x), to_fixed(y))
    }

    /// Double-double evaluation (phases reduced exactly in 128-bit fixed point).
    pub fn eval_dd(&self, x: u128, y: u128) -> CDd {
        let mut acc = CDd::default();
        for t in &self.terms {
            let e = CDd::cis_turns(signed_turns_dd(phase(t.k, x, y)));
            acc = acc + e.scale_c64(t.c);
        }
        acc
    }

    /// Dense Horner evaluator for 1-D polynomials, if the support is not too sparse.
    pub fn lattice(&self) -> Option<Lattice1D> {
        Lattice1D::new(self)
    }
}

fn knorm(k: [i128; 2]) -> f64 {
    let (a, b) = (k[0] as f64, k[1] as f64);
    (a * a + b * b).sqrt()
}

/// `e(θ) − 1 = 2i·sin(πθ)·e(θ/2)` for a phase `θ` in turns, with relative accuracy
/// for small `θ`.
pub fn expm1_turns(theta: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::PI * theta).sin_cos();
    Complex64::new(-2.0 * s * s, 2.0 * s * c)
}

/// `k₁x + k₂y mod 1` in fixed point.
#[inline]
pub fn phase(k: [i128; 2], x: u128, y: u128) -> u128 {
    (k[0] as u128).wrapping_mul(x).wrapping_add((k[1] as u128).wrapping_mul(y))
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `Σⱼ aⱼ e(j·g·x)` stored densely for `j ∈ [j_min, j_min + len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice1D {
    pub g: i128,
    pub j_min: i128,
    pub coeffs: Vec<Complex64>,
}

impl Lattice1D {
    fn new(p: &TrigPolynomial) -> Option<Self> {
        if p.dim != 1 {
            return None;
        }
        if p.is_empty() {
            return Some(Self { g: 1, j_min: 0, coeffs: vec![Complex64::new(0.0, 0.0)] });
        }
        let g = p.terms.iter().fold(0, |g, t| gcd(g, t.k[0]));
        let g = if g == 0 { 1 } else { g };
        let j_min = p.terms.first().unwrap().k[0] / g;
        let j_max = p.terms.last().unwrap().k[0] / g;
        let span = (j_max - j_min + 1) as usize;
        if span > 8 * p.len() + 64 {
            return None;
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); span];
        for t in &p.terms {
            coeffs[(t.k[0] / g - j_min) as usize] = t.c;
        }
        Some(Self { g, j_min, coeffs })
    }

    pub fn eval(&self, x: u128) -> Complex64 {
        let gx = (self.g as u128).wrapping_mul(x);
        let z = cis_fixed(gx);
        let mut acc = Complex64::new(0.0, 0.0);
        for &a in self.coeffs.iter().rev() {
            acc = acc * z + a;
        }
        acc * cis_fixed((self.j_min as u128).wrapping_mul(gx))
    }
}

/// Real part of the double-double evaluation of a 1-D polynomial.
pub fn eval_dd_real(p: &TrigPolynomial, x: u128) -> Dd {
    p.eval_dd(x, 0).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fixed::to_fixed;

    #[test]
    fn cosine_values() {
        let p = TrigPolynomial::cosine(3, 2.0);
        assert!((p.eval_f64(0.0, 0.0).re - 2.0).abs() < 1e-15);
        assert!((p.eval_f64(1.0 / 6.0, 0.0).re + 2.0).abs() < 1e-15);
        assert_eq!(p.mean(), Complex64::new(0.0, 0.0));
        assert!(p.is_real(0.0));
    }

    #[test]
    fn duplicates_merge_and_zeros_drop() {
        let one = Complex64::new(1.0, 0.0);
        let p = TrigPolynomial::from_1d([(2, one), (2, -one), (5, one)]).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.terms()[0].k, [5, 0]);
    }

    #[test]
    fn truncation_limits() {
        let p = TrigPolynomial::cosine(4, 1.0).add(&TrigPolynomial::cosine(9, 1.0)).unwrap();
        assert_eq!(p.truncate(100), p);
        assert!(p.truncate(1).is_empty());
        assert_eq!(p.truncate(5).len(), 2);
    }

    #[test]
    fn derivative_of_sine() {
        let p = TrigPolynomial::cosine(2, 1.0);
        let d = p.derivative(0, 1);
        // d/dx cos(4πx) = −4π sin(4πx).
        let x = 0.1;
        let want = -4.0 * std::f64::consts::PI * (4.0 * std::f64::consts::PI * x).sin();
        assert!((d.eval_f64(x, 0.0).re - want).abs() < 1e-13);
    }

    #[test]
    fn lattice_matches_direct() {
        let terms: Vec<(i128, Complex64)> =
            (-20..=20).filter(|&j| j != 0).map(|j| (j * 7, Complex64::new(1.0 / (j * j) as f64, 0.1 / j as f64))).collect();
        let p = TrigPolynomial::from_1d(terms).unwrap();
        let lat = p.lattice().unwrap();
        assert_eq!(lat.g, 7);
        for i in 0..50 {
            let x = to_fixed(i as f64 * 0.0371);
            assert!((lat.eval(x) - p.eval(x, 0)).norm() < 1e-14);
        }
    }

    #[test]
    fn dd_evaluation_agrees() {
        let p = TrigPolynomial::cosine(1_000_000_007, 1.0);
        let x = to_fixed(0.123456789);
        let a = p.eval(x, 0).re;
        let b = p.eval_dd(x, 0).re.to_f64();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn weighted_norms() {
        let p = TrigPolynomial::cosine(1, 2.0);
        assert!((p.weighted_l1(0) - 2.0).abs() < 1e-15);
        assert!((p.weighted_sup(1) - std::f64::consts::TAU).abs() < 1e-15);
    }
}
