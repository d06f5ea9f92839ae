//! The smooth step `θ` and its antiderivative `Θ`.
//!
//! `θ(x) = B(x − 1)` with `B(t) = N∫₀^t e^{−1/(u(1−u))} du` on `[0, 1]`,
//! normalized so that `B(1) = 1`. `B` and `C(t) = ∫₀^t B` are stored as
//! piecewise Chebyshev interpolants built once from Gauss–Legendre quadrature.

use std::sync::OnceLock;

use crate::numeric::cheb::Chebyshev;
use crate::numeric::quad::integrate;

const PIECES: usize = 32;
const DEGREE: usize = 36;

/// The unnormalized bump `e^{−1/(u(1−u))}` on `(0, 1)`.
pub fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

#[derive(Debug, Clone)]
pub struct SmoothingKernel {
    norm: f64,
    b: Vec<Chebyshev>,
    b_start: Vec<f64>,
    c: Vec<Chebyshev>,
    c_start: Vec<f64>,
}

impl SmoothingKernel {
    pub fn new() -> Self {
        let total = integrate(bump, 0.0, 1.0, 30, 64);
        let norm = 1.0 / total;
        let h = 1.0 / PIECES as f64;
        let mut b = Vec::with_capacity(PIECES);
        let mut b_start = Vec::with_capacity(PIECES);
        let mut c = Vec::with_capacity(PIECES);
        let mut c_start = Vec::with_capacity(PIECES);
        let mut b_left = 0.0;
        let mut c_left = 0.0;
        for p in 0..PIECES {
            let lo = p as f64 * h;
            let hi = lo + h;
            // Fit the increment on the piece; the offset is added at evaluation.
            let piece = Chebyshev::fit(|t| norm * integrate(bump, lo, t, 30, 2), lo, hi, DEGREE);
            let cp = piece.integral();
            b_start.push(b_left);
            c_start.push(c_left);
            c_left += cp.eval(hi) + b_left * h;
            b_left += norm * integrate(bump, lo, hi, 30, 4);
            b.push(piece);
            c.push(cp);
        }
        Self { norm, b, b_start, c, c_start }
    }

    /// Shared instance.
    pub fn global() -> &'static SmoothingKernel {
        static K: OnceLock<SmoothingKernel> = OnceLock::new();
        K.get_or_init(SmoothingKernel::new)
    }

    /// Normalizing constant `N`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn piece(t: f64) -> usize {
        ((t * PIECES as f64) as usize).min(PIECES - 1)
    }

    /// `B(t)`, clamped to 0 below 0 and 1 above 1.
    pub fn b(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            let i = Self::piece(t);
            (self.b_start[i] + self.b[i].eval(t)).clamp(0.0, 1.0)
        }
    }

    /// `C(t) = ∫₀^t B`, continued linearly beyond 1.
    pub fn c(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            self.c_end() + (t - 1.0)
        } else {
            let i = Self::piece(t);
            let lo = i as f64 / PIECES as f64;
            self.c_start[i] + self.b_start[i] * (t - lo) + self.c[i].eval(t)
        }
    }

    fn c_end(&self) -> f64 {
        let i = PIECES - 1;
        self.c_start[i] + self.b_start[i] / PIECES as f64 + self.c[i].eval(1.0)
    }

    /// `θ(x)`: 0 for `x ≤ 1`, 1 for `x ≥ 2`.
    pub fn theta(&self, x: f64) -> f64 {
        self.b(x - 1.0)
    }

    /// `θ′(x) = N·bump(x − 1)`.
    pub fn theta_prime(&self, x: f64) -> f64 {
        self.norm * bump(x - 1.0)
    }

    /// `Θ(y) = ∫_{−∞}^y θ`.
    pub fn theta_int(&self, y: f64) -> f64 {
        self.c(y - 1.0)
    }
}

impl Default for SmoothingKernel {
    fn default() -> Self {
        Self::new()
    }
}

/// `θ(x)` with the shared kernel.
pub fn theta_eval(x: f64) -> f64 {
    SmoothingKernel::global().theta(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus_and_midpoint() {
        assert_eq!(theta_eval(0.5), 0.0);
        assert_eq!(theta_eval(3.0), 1.0);
        assert!((theta_eval(1.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn monotone_and_continuous() {
        let k = SmoothingKernel::global();
        let mut prev = 0.0;
        for i in 0..=4000 {
            let x = 1.0 + i as f64 / 4000.0;
            let v = k.theta(x);
            assert!(v >= prev - 1e-15, "x={x} v={v} prev={prev}");
            assert!((0.0..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
        assert!((k.theta(2.0 - 1e-12) - 1.0).abs() < 1e-13);
        assert!(k.theta(1.0 + 1e-12).abs() < 1e-13);
    }

    #[test]
    fn symmetric() {
        let k = SmoothingKernel::global();
        for i in 1..100 {
            let t = i as f64 / 100.0;
            assert!((k.b(t) + k.b(1.0 - t) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn antiderivative_half_at_one() {
        let k = SmoothingKernel::global();
        assert!((k.c(1.0) - 0.5).abs() < 1e-14);
        // Independent quadrature of B at a few points.
        for &t in &[0.25, 0.5, 0.8] {
            let q = integrate(|s| k.b(s), 0.0, t, 30, 64);
            assert!((k.c(t) - q).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let k = SmoothingKernel::global();
        for &x in &[1.2, 1.5, 1.7] {
            let h = 1e-6;
            let fd = (k.theta(x + h) - k.theta(x - h)) / (2.0 * h);
            assert!((fd - k.theta_prime(x)).abs() < 1e-8);
        }
    }
}
