//! Double-double arithmetic (unevaluated sum of two `f64`, ~106-bit significand).
//!
//! Only the operations needed for high-precision trigonometric sums are
//! provided: ring operations, division and `sin/cos` of an angle given in turns.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// 2π as a double-double.
pub const TWO_PI: Dd = Dd { hi: std::f64::consts::TAU, lo: 2.4492935982947064e-16 };

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Normalizes `a + b`.
    pub fn from_sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    /// Nearest integer (ties away from zero), as a double-double.
    pub fn round(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            let lo = self.lo.round();
            let (hi, lo) = quick_two_sum(hi, lo);
            Dd { hi, lo }
        } else if (hi - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // Exact tie in the high word is broken by the sign of the low word.
            let hi = if (self.lo > 0.0) == (hi > self.hi) { hi } else { self.hi.floor() + if self.lo > 0.0 { 1.0 } else { 0.0 } };
            Dd { hi, lo: 0.0 }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    /// `(sin 2πt, cos 2πt)` for `t` in turns.
    pub fn sin_cos_turns(t: Dd) -> (Dd, Dd) {
        // Reduce to r ∈ [−1/8, 1/8] turns plus a quarter-turn count.
        let t = t - t.round();
        let quarters = (t.hi * 4.0).round();
        let r = t - Dd::new(quarters * 0.25);
        let x = TWO_PI * r;
        let (s, c) = sin_cos_taylor(x);
        match (quarters as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

/// Taylor series for `|x| ≤ π/4`; 27 terms give full double-double accuracy.
fn sin_cos_taylor(x: Dd) -> (Dd, Dd) {
    let x2 = x * x;
    // sin: Σ (−1)^k x^{2k+1}/(2k+1)!, evaluated by Horner from the top.
    let mut s = Dd::ZERO;
    let mut c = Dd::ZERO;
    const N: usize = 14;
    for k in (0..N).rev() {
        let fs = fact_inv(2 * k + 1);
        let fc = fact_inv(2 * k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s = s * x2 + fs.mul_f64(sign);
        c = c * x2 + fc.mul_f64(sign);
    }
    (s * x, c)
}

/// `1/n!` as a double-double (exact recursion in double-double).
fn fact_inv(n: usize) -> Dd {
    let mut v = Dd::ONE;
    for i in 2..=n {
        v = v / Dd::new(i as f64);
    }
    v
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Complex double-double.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub fn cis_turns(t: Dd) -> Self {
        let (s, c) = Dd::sin_cos_turns(t);
        CDd { re: c, im: s }
    }

    pub fn scale_c64(self, c: num_complex::Complex64) -> Self {
        let (a, b) = (Dd::new(c.re), Dd::new(c.im));
        CDd { re: self.re * a - self.im * b, im: self.re * b + self.im * a }
    }
}

impl Add for CDd {
    type Output = CDd;
    fn add(self, b: CDd) -> CDd {
        CDd { re: self.re + b.re, im: self.im + b.im }
    }
}

impl Sub for CDd {
    type Output = CDd;
    fn sub(self, b: CDd) -> CDd {
        CDd { re: self.re - b.re, im: self.im - b.im }
    }
}
