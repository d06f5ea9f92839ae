//! Gauss–Legendre quadrature.

/// Nodes and weights of the `n`-point rule on `[−1, 1]` (Newton on `Pₙ`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(Pₙ(z), Pₙ′(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// `∫_a^b f` with the `n`-point rule on `pieces` equal subintervals.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize, pieces: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let h = (b - a) / pieces as f64;
    let mut acc = super::sum::Neumaier::new();
    for p in 0..pieces {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc.add(wi * f(lo + 0.5 * h * (xi + 1.0)) * 0.5 * h);
        }
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let v = integrate(|x| x.powi(9) + 3.0 * x * x, 0.0, 1.0, 5, 1);
        assert!((v - (0.1 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_two() {
        let (_, w) = gauss_legendre(24);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sine_integral() {
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, 20, 4);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
