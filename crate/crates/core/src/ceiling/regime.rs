//! Amplitude scales, band indices and stretch windows of the construction.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// How amplitudes depend on the denominators.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplitudeLaw {
    /// `εₙ = e^{−qₙ}`, `ε′ₙ = e^{−q′ₙ}`, windows `W(q) = e^{2q}`.
    Exponential,
    /// `εₙ = s_x·qₙ^{−e_x}`, `ε′ₙ = s_y·q′ₙ^{−e_y}`, `W(q) = c_w·q^{p_w}`.
    Relaxed { sx: f64, ex: f64, sy: f64, ey: f64, w_coef: f64, w_exp: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub law: AmplitudeLaw,
    /// `Aₙ = amp_factor·εₙ`.
    pub amp_factor: f64,
    /// Band index `νₙ = n + band_offset`.
    pub band_offset: usize,
}

fn ln_big(q: &BigInt) -> f64 {
    match q.to_f64() {
        Some(v) if v.is_finite() && v > 0.0 => v.ln(),
        _ => {
            let shift = q.bits().saturating_sub(60);
            let top = (q >> shift).to_f64().unwrap_or(1.0);
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

impl Regime {
    pub fn relaxed(sx: f64, ex: f64, sy: f64, ey: f64, w_coef: f64, w_exp: f64) -> Self {
        Self { law: AmplitudeLaw::Relaxed { sx, ex, sy, ey, w_coef, w_exp }, amp_factor: 3.0, band_offset: 11 }
    }

    pub fn exponential() -> Self {
        Self { law: AmplitudeLaw::Exponential, amp_factor: 3.0, band_offset: 11 }
    }

    /// `εₙ` for the X-level with denominator `q`.
    pub fn eps(&self, q: &BigInt) -> f64 {
        match self.law {
            AmplitudeLaw::Exponential => (-q.to_f64().unwrap_or(f64::INFINITY)).exp(),
            AmplitudeLaw::Relaxed { sx, ex, .. } => (sx.ln() - ex * ln_big(q)).exp(),
        }
    }

    /// `ε′ₙ` for the Y-level with denominator `q′`.
    pub fn eps_p(&self, qp: &BigInt) -> f64 {
        match self.law {
            AmplitudeLaw::Exponential => (-qp.to_f64().unwrap_or(f64::INFINITY)).exp(),
            AmplitudeLaw::Relaxed { sy, ey, .. } => (sy.ln() - ey * ln_big(qp)).exp(),
        }
    }

    /// `log₁₀ εₙ`, finite even when `εₙ` underflows.
    pub fn log10_eps(&self, q: &BigInt) -> f64 {
        match self.law {
            AmplitudeLaw::Exponential => -ln_big(q).exp() / std::f64::consts::LN_10,
            AmplitudeLaw::Relaxed { sx, ex, .. } => (sx.ln() - ex * ln_big(q)) / std::f64::consts::LN_10,
        }
    }

    pub fn amp(&self, q: &BigInt) -> f64 {
        self.amp_factor * self.eps(q)
    }

    pub fn nu(&self, n: usize) -> f64 {
        (n + self.band_offset) as f64
    }

    /// Window scale `W(q)`; may be `+∞` for huge `q`.
    pub fn w(&self, q: &BigInt) -> f64 {
        match self.law {
            AmplitudeLaw::Exponential => (2.0 * q.to_f64().unwrap_or(f64::INFINITY)).exp(),
            AmplitudeLaw::Relaxed { w_coef, w_exp, .. } => (w_coef.ln() + w_exp * ln_big(q)).exp(),
        }
    }

    /// Bound on `‖X̃ₙ‖_{C^r}`: `e^{−qₙ/2}`, or `√εₙ·(2πνqₙ)^r` in relaxed mode.
    pub fn cr_bound(&self, q: &BigInt, nu: f64, r: u32) -> f64 {
        match self.law {
            AmplitudeLaw::Exponential => (-0.5 * q.to_f64().unwrap_or(f64::INFINITY)).exp(),
            AmplitudeLaw::Relaxed { .. } => {
                let base = std::f64::consts::TAU * nu * q.to_f64().unwrap_or(f64::INFINITY);
                self.eps(q).sqrt() * base.powi(r as i32)
            }
        }
    }

    /// Bound on `|X̃ₙ|` where `X̂ₙ` vanishes: `1/q′ₙ²`, or `εₙ/q′ₙ` in relaxed mode.
    pub fn band_bound(&self, q: &BigInt, qp: &BigInt) -> f64 {
        let qp = qp.to_f64().unwrap_or(f64::INFINITY);
        match self.law {
            AmplitudeLaw::Exponential => 1.0 / (qp * qp),
            AmplitudeLaw::Relaxed { .. } => self.eps(q) / qp,
        }
    }

    /// Required slope `2εₙ` of `X̃ₙ` on the rising band.
    pub fn slope_threshold(&self, q: &BigInt) -> f64 {
        2.0 * self.eps(q)
    }

    /// Parameters as ordered `key=value` pairs.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("amp_factor".to_string(), self.amp_factor.to_string()),
            ("band_offset".to_string(), self.band_offset.to_string()),
        ];
        match self.law {
            AmplitudeLaw::Exponential => v.push(("law".into(), "exponential".into())),
            AmplitudeLaw::Relaxed { sx, ex, sy, ey, w_coef, w_exp } => {
                v.push(("law".into(), "relaxed".into()));
                for (k, x) in [("sx", sx), ("ex", ex), ("sy", sy), ("ey", ey), ("w_coef", w_coef), ("w_exp", w_exp)] {
                    v.push((k.into(), x.to_string()));
                }
            }
        }
        v
    }

    /// [`Regime::describe`] as one space-separated line.
    pub fn summary(&self) -> String {
        self.describe().iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}
