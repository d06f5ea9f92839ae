//! The bump profile of one level and its Fourier coefficients.
//!
//! All shapes are written in the unit variable `u = {qₙx}`: with band index
//! `ν`, `ξ(u) = [Θ(νu) − Θ(νu − ν/2 + 2)]/ν`, `ς(u) = ξ(u) − Ξ·θ(νu − ν/2 + 2)`
//! with plateau `Ξ = 1/2 − 2/ν`, and `H(u) = ς(u) − ς(u − 1/2)`. Then
//! `ξₙ(x) = ξ(qₙx)/qₙ` and `X̂ₙ(x) = (Aₙ/qₙ)·H({qₙx})`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rustfft::FftPlanner;

use super::kernel::SmoothingKernel;
use crate::error::{Error, Result};
use crate::trig::TrigPolynomial;

/// One level's profile parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfileLevel {
    pub n: usize,
    pub q: BigInt,
    /// Amplitude `Aₙ` (slope of `X̂ₙ` on the rising band).
    pub amp: f64,
    /// Band index `ν`.
    pub nu: f64,
}

impl BumpProfileLevel {
    pub fn new(n: usize, q: BigInt, amp: f64, nu: f64) -> Result<Self> {
        if nu < 6.0 {
            return Err(Error::InvalidInput(format!("band index {nu} < 6 leaves no plateau")));
        }
        Ok(Self { n, q, amp, nu })
    }

    fn q_f64(&self) -> f64 {
        self.q.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Plateau value `Ξ = 1/2 − 2/ν` in unit variables.
    pub fn plateau(&self) -> f64 {
        0.5 - 2.0 / self.nu
    }

    pub fn xi_u(&self, u: f64) -> f64 {
        let k = SmoothingKernel::global();
        let nu = self.nu;
        (k.theta_int(nu * u) - k.theta_int(nu * u - 0.5 * nu + 2.0)) / nu
    }

    pub fn varsigma_u(&self, u: f64) -> f64 {
        let k = SmoothingKernel::global();
        let nu = self.nu;
        self.xi_u(u) - self.plateau() * k.theta(nu * u - 0.5 * nu + 2.0)
    }

    /// `H(u)` on one period; `u` is reduced mod 1.
    pub fn h_u(&self, u: f64) -> f64 {
        let u = u - u.floor();
        self.varsigma_u(u) - self.varsigma_u(u - 0.5)
    }

    /// `H′(u)`.
    pub fn h_prime_u(&self, u: f64) -> f64 {
        let u = u - u.floor();
        self.varsigma_prime_u(u) - self.varsigma_prime_u(u - 0.5)
    }

    fn varsigma_prime_u(&self, u: f64) -> f64 {
        let k = SmoothingKernel::global();
        let nu = self.nu;
        let a = nu * u - 0.5 * nu + 2.0;
        k.theta(nu * u) - k.theta(a) - self.plateau() * nu * k.theta_prime(a)
    }

    fn check_domain(&self, x: f64) -> Result<f64> {
        let q = self.q_f64();
        if !(0.0..=1.0 / q).contains(&x) {
            return Err(Error::Domain(format!("x={x} outside [0, 1/q] with q={}", self.q)));
        }
        Ok(q)
    }

    /// `ξₙ(x)` for `x ∈ [0, 1/qₙ]`.
    pub fn xi_eval(&self, x: f64) -> Result<f64> {
        let q = self.check_domain(x)?;
        Ok(self.xi_u(q * x) / q)
    }

    /// `ςₙ(x)` for `x ∈ [0, 1/qₙ]`.
    pub fn varsigma_eval(&self, x: f64) -> Result<f64> {
        let q = self.check_domain(x)?;
        Ok(self.varsigma_u(q * x) / q)
    }

    /// `X̂ₙ(x)` for any real `x`.
    pub fn hat_eval(&self, x: f64) -> f64 {
        let q = self.q_f64();
        self.amp / q * self.h_u(q * x)
    }
}

/// Relative size (against `sup|H|`) below which trailing coefficients count as resolved.
pub const TAIL_TOL: f64 = 1e-16;

/// Fourier coefficients `cⱼ` of `H` for `|j| < N/2`, from `N = 2^g` samples.
pub fn unit_coefficients(level: &BumpProfileLevel, g: u32) -> Vec<Complex64> {
    let n = 1usize << g;
    let mut buf: Vec<Complex64> = (0..n).map(|i| Complex64::new(level.h_u(i as f64 / n as f64), 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Largest coefficient modulus in the upper half band `N/4 ≤ |j| < N/2`.
fn tail(coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len();
    coeffs[n / 4..3 * n / 4].iter().fold(0.0f64, |m, c| m.max(c.norm()))
}

/// `X̂ₙ` as a trigonometric polynomial with frequencies `j·qₙ`.
///
/// With `g = None` the grid starts at the smallest power of two `≥ 64ν` and is
/// doubled until the upper half band is below `TAIL_TOL·sup|H|`; with a fixed
/// `g` an unresolved tail is a resolution error.
pub fn hat_x_build(level: &BumpProfileLevel, g: Option<u32>) -> Result<TrigPolynomial> {
    let q = level
        .q
        .to_i128()
        .filter(|q| *q > 0)
        .ok_or_else(|| Error::Capacity(format!("q={} does not fit 128-bit frequencies", level.q)))?;
    let sup = level.plateau();
    let min_g = (64.0 * level.nu).log2().ceil() as u32;
    let (mut gg, fixed) = match g {
        Some(g) if (1u64 << g) as f64 >= 64.0 * level.nu => (g, true),
        Some(g) => return Err(Error::Resolution(format!("grid 2^{g} below 64·ν = {}", 64.0 * level.nu))),
        None => (min_g, false),
    };
    let coeffs = loop {
        let c = unit_coefficients(level, gg);
        let t = tail(&c);
        if t <= TAIL_TOL * sup {
            break c;
        }
        if fixed || gg >= 22 {
            return Err(Error::Resolution(format!("aliasing tail {t:.3e} on 2^{gg} grid")));
        }
        gg += 1;
    };
    let n = coeffs.len();
    // Keep the resolved band; enforce exact Hermitian symmetry and zero mean.
    let keep = (1..n / 2).rev().find(|&j| coeffs[j].norm() > 1e-3 * TAIL_TOL * sup).unwrap_or(0);
    let scale = level.amp / q as f64;
    let mut pairs = Vec::with_capacity(2 * keep);
    for j in 1..=keep {
        let c = 0.5 * (coeffs[j] + coeffs[n - j].conj()) * scale;
        let k = (j as i128)
            .checked_mul(q)
            .ok_or_else(|| Error::Capacity("frequency overflow".into()))?;
        pairs.push((k, c));
        pairs.push((-k, c.conj()));
    }
    TrigPolynomial::from_1d(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fixed::to_fixed;

    fn level(q: i64, nu: f64) -> BumpProfileLevel {
        BumpProfileLevel::new(3, BigInt::from(q), 0.03, nu).unwrap()
    }

    #[test]
    fn xi_vanishes_on_first_band() {
        let l = level(7, 12.0);
        assert_eq!(l.xi_eval(1.0 / (12.0 * 7.0)).unwrap(), 0.0);
        assert_eq!(l.xi_eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn xi_has_unit_slope_on_plateau_band() {
        let l = level(7, 12.0);
        let q = 7.0;
        let (a, b) = (2.0 / (12.0 * q) + 1e-4, 1.0 / (2.0 * q) - 1.0 / (12.0 * q) - 1e-4);
        let s = (l.xi_eval(b).unwrap() - l.xi_eval(a).unwrap()) / (b - a);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xi_constant_past_half_period() {
        let l = level(7, 12.0);
        let a = l.xi_eval(1.0 / 14.0).unwrap();
        let b = l.xi_eval(1.0 / 7.0).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!((a * 7.0 - l.plateau()).abs() < 1e-14);
    }

    #[test]
    fn varsigma_endpoints() {
        let l = level(5, 14.0);
        assert_eq!(l.varsigma_eval(1e-6).unwrap(), 0.0);
        assert!(l.varsigma_eval(1.0 / 5.0).unwrap().abs() < 1e-12);
        // Rising band: the second term is switched off.
        let x = 0.3 / 5.0;
        assert_eq!(l.varsigma_eval(x).unwrap(), l.xi_eval(x).unwrap());
    }

    #[test]
    fn domain_checked() {
        let l = level(5, 14.0);
        assert!(matches!(l.xi_eval(0.3), Err(Error::Domain(_))));
        assert!(matches!(l.varsigma_eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn hat_polynomial_properties() {
        let l = level(3, 12.0);
        let p = hat_x_build(&l, None).unwrap();
        assert_eq!(p.mean(), Complex64::new(0.0, 0.0));
        assert!(p.is_real(0.0));
        assert!(p.terms().iter().all(|t| t.k[0] % 3 == 0));
        let q = 3.0;
        for i in 0..400 {
            let u = i as f64 / 400.0;
            let x = u / q;
            let v = p.eval(to_fixed(x), 0).re;
            assert!((v - l.hat_eval(x)).abs() < 1e-15, "u={u}");
            if u <= 1.0 / 12.0 {
                assert!(v.abs() < 1e-17);
            }
            // Periodicity with period 1/q.
            let w = p.eval(to_fixed(x + 1.0 / q), 0).re;
            assert!((v - w).abs() < 1e-15);
        }
        // Slope Aₙ on the rising band, −Aₙ on the falling one.
        let d = p.derivative(0, 1);
        for &(u, s) in &[(0.25, 1.0), (0.3, 1.0), (0.75, -1.0), (0.8, -1.0)] {
            let v = d.eval(to_fixed(u / q), 0).re;
            assert!((v - s * 0.03).abs() < 1e-12, "u={u} v={v}");
        }
    }

    #[test]
    fn fixed_grid_too_coarse() {
        let l = level(3, 12.0);
        assert!(matches!(hat_x_build(&l, Some(8)), Err(Error::Resolution(_))));
        assert!(matches!(hat_x_build(&l, Some(10)), Err(Error::Resolution(_))));
    }

    #[test]
    fn zero_mean_of_profile() {
        let l = level(3, 16.0);
        let m = crate::numeric::quad::integrate(|u| l.h_u(u), 0.0, 1.0, 30, 64);
        assert!(m.abs() < 1e-15);
    }
}
