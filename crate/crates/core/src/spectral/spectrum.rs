//! Lag-window spectral density estimates from autocorrelation series.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::correlation::CorrelationSeries;
use crate::error::{Error, Result};
use crate::report::fmt_f64;

/// Minimum number of lags accepted by [`periodogram`].
pub const MIN_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagWindow {
    Bartlett,
    Parzen,
}

impl LagWindow {
    /// Weight at `u = t/M`; both windows have nonnegative transforms.
    pub fn weight(self, u: f64) -> f64 {
        let u = u.abs();
        if u >= 1.0 {
            return 0.0;
        }
        match self {
            LagWindow::Bartlett => 1.0 - u,
            LagWindow::Parzen if u <= 0.5 => 1.0 - 6.0 * u * u + 6.0 * u * u * u,
            LagWindow::Parzen => 2.0 * (1.0 - u).powi(3),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LagWindow::Bartlett => "bartlett",
            LagWindow::Parzen => "parzen",
        }
    }
}

/// Density on `[−½, ½)` cycles per step.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub freqs: Vec<f64>,
    pub density: Vec<f64>,
    pub window: LagWindow,
    pub max_lag: usize,
    /// Bins where sampling noise made the raw estimate negative (set to 0).
    pub clamped: usize,
}

impl SpectrumEstimate {
    /// `∫ density dν` by the bin sum.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() / self.density.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("freq,density\n");
        for (f, d) in self.freqs.iter().zip(&self.density) {
            s.push_str(&format!("{},{}\n", fmt_f64(*f), fmt_f64(*d)));
        }
        s
    }
}

/// `S(ν) = Σ_{|t|≤M} w(t/M)·C(t)·e(−tν)` with `M` the last lag of the series.
pub fn periodogram(series: &CorrelationSeries, window: LagWindow) -> Result<SpectrumEstimate> {
    let m = series.len().saturating_sub(1);
    if series.len() < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!("periodogram needs at least {MIN_SAMPLES} lags, got {}", series.len())));
    }
    let n = (4 * m + 4).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for t in -(m as i64)..=(m as i64) {
        let w = window.weight(t as f64 / (m + 1) as f64);
        buf[t.rem_euclid(n as i64) as usize] += series.at(t) * w;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut freqs = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    let mut clamped = 0;
    // Bin j ↦ ν = j/n − 1/2.
    for j in 0..n {
        let src = (j + n / 2) % n;
        let mut d = buf[src].re;
        if d < 0.0 {
            clamped += 1;
            d = 0.0;
        }
        freqs.push(j as f64 / n as f64 - 0.5);
        density.push(d);
    }
    Ok(SpectrumEstimate { freqs, density, window, max_lag: m, clamped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::correlation::Estimator;

    fn series(values: Vec<Complex64>) -> CorrelationSeries {
        let errors = vec![0.0; values.len()];
        CorrelationSeries { step: 1.0, values, errors, estimator: Estimator::Orbit }
    }

    #[test]
    fn cosine_has_two_peaks() {
        let theta = 0.173;
        let s = series((0..256).map(|t| Complex64::new((std::f64::consts::TAU * theta * t as f64).cos(), 0.0)).collect());
        let sp = periodogram(&s, LagWindow::Parzen).unwrap();
        let bin = 1.0 / sp.freqs.len() as f64;
        let half = sp.freqs.len() / 2;
        let peak = |range: std::ops::Range<usize>| range.max_by(|&a, &b| sp.density[a].total_cmp(&sp.density[b])).unwrap();
        let pos = peak(half..sp.freqs.len());
        let neg = peak(0..half);
        assert!((sp.freqs[pos] - theta).abs() <= bin, "{}", sp.freqs[pos]);
        assert!((sp.freqs[neg] + theta).abs() <= bin, "{}", sp.freqs[neg]);
        assert!((sp.mass() - 1.0).abs() < 1e-12);
        assert_eq!(sp.clamped, 0);
    }

    #[test]
    fn white_noise_is_flat() {
        let mut v = vec![Complex64::new(0.0, 0.0); 128];
        v[0] = Complex64::new(2.0, 0.0);
        let sp = periodogram(&series(v), LagWindow::Bartlett).unwrap();
        assert!(sp.density.iter().all(|d| (d - 2.0).abs() < 1e-12));
    }

    #[test]
    fn zero_series_and_short_series() {
        let sp = periodogram(&series(vec![Complex64::new(0.0, 0.0); 64]), LagWindow::Parzen).unwrap();
        assert!(sp.density.iter().all(|&d| d == 0.0));
        assert!(periodogram(&series(vec![Complex64::new(1.0, 0.0); 10]), LagWindow::Parzen).is_err());
    }

    #[test]
    fn window_shapes() {
        assert_eq!(LagWindow::Parzen.weight(0.0), 1.0);
        assert!((LagWindow::Parzen.weight(0.5) - 0.25).abs() < 1e-15);
        assert_eq!(LagWindow::Bartlett.weight(1.0), 0.0);
    }
}
