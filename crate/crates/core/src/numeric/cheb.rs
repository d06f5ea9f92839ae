//! Piecewise Chebyshev interpolants on an interval.

/// Chebyshev series on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    pub a: f64,
    pub b: f64,
    pub c: Vec<f64>,
}

impl Chebyshev {
    /// Interpolates `f` at `n` Chebyshev points of the first kind.
    pub fn fit<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> Self {
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let t = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
                f(0.5 * (a + b) + 0.5 * (b - a) * t)
            })
            .collect();
        let mut c = vec![0.0; n];
        for (k, ck) in c.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, v) in vals.iter().enumerate() {
                s += v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
            }
            *ck = 2.0 * s / n as f64;
        }
        c[0] *= 0.5;
        Self { a, b, c }
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in self.c.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.c[0]
    }

    /// Antiderivative vanishing at `a`.
    pub fn integral(&self) -> Self {
        let n = self.c.len();
        let h = 0.5 * (self.b - self.a);
        let mut c = vec![0.0; n + 1];
        // Work with the convention c₀ counted once (already halved).
        let coef = |k: usize| -> f64 { if k < n { if k == 0 { 2.0 * self.c[0] } else { self.c[k] } } else { 0.0 } };
        for k in 1..=n {
            let prev = coef(k - 1);
            let next = coef(k + 1);
            c[k] = h * (prev - next) / (2.0 * k as f64);
        }
        let mut out = Self { a: self.a, b: self.b, c };
        let v0 = out.eval(self.a);
        out.c[0] -= v0;
        out
    }

    /// Largest absolute coefficient among the last `m`.
    pub fn tail(&self, m: usize) -> f64 {
        self.c.iter().rev().take(m).fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exponential() {
        let ch = Chebyshev::fit(f64::exp, 0.0, 1.0, 20);
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert!((ch.eval(x) - x.exp()).abs() < 1e-14, "x={x} err={}", ch.eval(x) - x.exp());
        }
    }

    #[test]
    fn integral_of_cosine() {
        let ch = Chebyshev::fit(f64::cos, 0.5, 2.0, 24).integral();
        for i in 0..=10 {
            let x = 0.5 + 1.5 * i as f64 / 10.0;
            assert!((ch.eval(x) - (x.sin() - 0.5f64.sin())).abs() < 1e-14);
        }
    }
}
