//! Observables `f(x, y, s) = b(x, y)·χ(s)` on the suspension.

use num_complex::Complex64;

use crate::dynamics::FlowPoint;
use crate::error::{Error, Result};
use crate::trig::{Term, TrigPolynomial};

/// `χ(s) = (4v(1 − v))³` with `v = (s − lo)/(hi − lo)` on `[lo, hi]`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberBump {
    pub lo: f64,
    pub hi: f64,
}

impl FiberBump {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidInput(format!("fiber bump support [{lo}, {hi}] is empty or negative")));
        }
        Ok(Self { lo, hi })
    }

    /// Support `[0.1, 0.9]·inf φ`.
    pub fn for_floor(inf_phi: f64) -> Result<Self> {
        Self::new(0.1 * inf_phi, 0.9 * inf_phi)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.lo || s >= self.hi {
            return 0.0;
        }
        let v = (s - self.lo) / (self.hi - self.lo);
        let b = 4.0 * v * (1.0 - v);
        b * b * b
    }

    /// `∫χ = (hi − lo)·64·B(4, 4) = (hi − lo)·16/35`.
    pub fn integral(&self) -> f64 {
        (self.hi - self.lo) * 16.0 / 35.0
    }

    /// `∫χ² = (hi − lo)·4096·B(7, 7) = (hi − lo)·1024/3003`.
    pub fn norm_sq(&self) -> f64 {
        (self.hi - self.lo) * 1024.0 / 3003.0
    }
}

/// Mean-zero observable: base polynomial on `𝕋²` times a fiber bump.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    base: TrigPolynomial,
    chi: FiberBump,
}

impl Observable {
    /// Drops the `k = 0` mode of `base` (the only part of `f` with nonzero mean,
    /// since `χ` is supported below `inf φ`). Zero remaining norm is an error.
    pub fn new(base: &TrigPolynomial, chi: FiberBump) -> Result<Self> {
        let lifted = if base.dim() == 1 { base.lift(0) } else { base.clone() };
        let terms: Vec<Term> = lifted.terms().iter().copied().filter(|t| t.k != [0, 0]).collect();
        let base = TrigPolynomial::from_terms(2, terms)?;
        if base.is_empty() {
            return Err(Error::InvalidInput("observable has zero norm after mean removal".into()));
        }
        Ok(Self { base, chi })
    }

    /// `e(k·z)·χ(s)`.
    pub fn character(k: [i128; 2], chi: FiberBump) -> Result<Self> {
        Self::new(&TrigPolynomial::from_terms(2, [Term { k, c: Complex64::new(1.0, 0.0) }])?, chi)
    }

    pub fn base(&self) -> &TrigPolynomial {
        &self.base
    }

    pub fn chi(&self) -> FiberBump {
        self.chi
    }

    pub fn eval(&self, p: FlowPoint) -> Complex64 {
        let c = self.chi.eval(p.s);
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.base.eval(p.base.x, p.base.y) * c
    }

    /// `‖f‖²_{L²(μ)} = Σ|cₖ|²·∫χ²` (the fiber support lies below `inf φ`).
    pub fn norm_sq(&self) -> f64 {
        self.base.terms().iter().map(|t| t.c.norm_sqr()).sum::<f64>() * self.chi.norm_sq()
    }
}

/// Five mean-zero observables used by the correlation probes.
pub fn standard_family(chi: FiberBump) -> Result<Vec<Observable>> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mixed = TrigPolynomial::from_terms(
        2,
        [
            Term { k: [1, 0], c: c(0.5, 0.0) },
            Term { k: [-1, 0], c: c(0.5, 0.0) },
            Term { k: [0, 1], c: c(0.0, 0.25) },
            Term { k: [0, -1], c: c(0.0, -0.25) },
        ],
    )?;
    Ok(vec![
        Observable::character([1, 0], chi)?,
        Observable::character([0, 1], chi)?,
        Observable::character([1, 1], chi)?,
        Observable::character([2, -1], chi)?,
        Observable::new(&mixed, chi)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad::integrate;

    #[test]
    fn bump_moments_match_quadrature() {
        let b = FiberBump::new(0.1, 0.9).unwrap();
        let i1 = integrate(|s| b.eval(s), b.lo, b.hi, 8, 4);
        let i2 = integrate(|s| b.eval(s).powi(2), b.lo, b.hi, 10, 4);
        assert!((i1 - b.integral()).abs() < 1e-14);
        assert!((i2 - b.norm_sq()).abs() < 1e-14);
    }

    #[test]
    fn constant_base_is_rejected() {
        let b = FiberBump::new(0.1, 0.9).unwrap();
        let one = TrigPolynomial::from_terms(2, [Term { k: [0, 0], c: Complex64::new(2.0, 0.0) }]).unwrap();
        assert!(Observable::new(&one, b).is_err());
    }

    #[test]
    fn mean_mode_is_removed() {
        let b = FiberBump::new(0.1, 0.9).unwrap();
        let p = TrigPolynomial::from_terms(
            2,
            [Term { k: [0, 0], c: Complex64::new(2.0, 0.0) }, Term { k: [1, 0], c: Complex64::new(1.0, 0.0) }],
        )
        .unwrap();
        let f = Observable::new(&p, b).unwrap();
        assert_eq!(f.base().len(), 1);
        assert!((f.norm_sq() - b.norm_sq()).abs() < 1e-16);
    }
}
