//! The reparametrized linear flow on `𝕋³` and its conjugacy with the special flow.
//!
//! Chart: `(z, s) ↦ (z + wα̅, w)` with `w = s/φ(z)` and `α̅ = (α, α′)`. In this
//! chart the flow solves `u̇ = (α, α′, 1)/Φ(u)` with `Φ(u) = φ(x − wα, y − wα′)`,
//! which is constant along each segment `w ∈ [0, 1)` and jumps at the seam
//! `w ∈ ℤ`. The integrator never steps across the seam: it lands on it exactly.

use super::flow::{FlowEngine, FlowPoint};
use super::torus::TorusPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus3Point {
    pub x: f64,
    pub y: f64,
    /// Height in the current segment, `0 ≤ w < 1`.
    pub w: f64,
}

fn frac(v: f64) -> f64 {
    let f = v - v.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

fn cdist(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

impl Torus3Point {
    pub fn new(x: f64, y: f64, w: f64) -> Self {
        Self { x: frac(x), y: frac(y), w: frac(w) }
    }

    /// Max-metric distance on `𝕋³`.
    pub fn dist(self, o: Torus3Point) -> f64 {
        cdist(self.x, o.x).max(cdist(self.y, o.y)).max(cdist(self.w, o.w))
    }
}

/// Section chart `(z, s) ↦ (z + (s/φ(z))·α̅, s/φ(z))`.
pub fn section_map(p: FlowPoint, eng: &FlowEngine) -> Torus3Point {
    let (a, ap) = eng.translation().alpha_f64();
    let w = p.s / eng.phi(p.base);
    let (x, y) = p.base.to_f64();
    Torus3Point::new(x + w * a, y + w * ap, w)
}

/// Inverse chart.
pub fn section_inverse(u: Torus3Point, eng: &FlowEngine) -> FlowPoint {
    let (a, ap) = eng.translation().alpha_f64();
    let base = TorusPoint::from_f64(u.x - u.w * a, u.y - u.w * ap);
    FlowPoint { base, s: u.w * eng.phi(base) }
}

// Dormand–Prince 5(4) tableau; the field is autonomous, so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Step statistics of one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: u64,
    pub rejected: u64,
    pub seams: u64,
}

/// Unwrapped state `(x, y, w)` with `w` measured inside the current segment.
type State = [f64; 3];

fn field(eng: &FlowEngine, alpha: (f64, f64), u: &State, seg_w: f64) -> State {
    // `seg_w` is the height of the segment origin; Φ uses the segment's base point.
    let w = u[2] - seg_w;
    let base = TorusPoint::from_f64(u[0] - w * alpha.0, u[1] - w * alpha.1);
    let inv = 1.0 / eng.phi(base);
    [alpha.0 * inv, alpha.1 * inv, inv]
}

/// Integrates for time `t` (either sign) with local error `≤ tol`.
pub fn reparam_ode_advance(u: Torus3Point, t: f64, eng: &FlowEngine, tol: f64) -> Result<(Torus3Point, OdeStats)> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::InvalidInput(format!("tolerance {tol:e} outside [1e-12, 1e-4]")));
    }
    let alpha = eng.translation().alpha_f64();
    let dir = if t < 0.0 { -1.0 } else { 1.0 };
    let total = t.abs();
    let mut stats = OdeStats::default();
    // Segment origin at height 0 of an unwrapped copy.
    let mut y: State = [u.x, u.y, u.w];
    if dir < 0.0 && u.w == 0.0 {
        // The seam belongs to the upper segment; going down starts in the previous one.
        y[2] = 1.0;
    }
    let mut seg = 0.0f64;
    let mut elapsed = 0.0f64;
    let mut h = (0.05f64).min(total.max(1e-300));
    let h_min = 1e-14 * total.max(1.0);
    let rhs = |s: &State, seg: f64| {
        let f = field(eng, alpha, s, seg);
        [dir * f[0], dir * f[1], dir * f[2]]
    };
    while elapsed < total {
        h = h.min(total - elapsed);
        // Seam ahead: w reaches seg + 1 (forward) or seg (backward).
        let k1 = rhs(&y, seg);
        let target = if dir > 0.0 { seg + 1.0 } else { seg };
        let dist = (target - y[2]).abs();
        let mut to_seam = false;
        if k1[2].abs() * h >= dist {
            h = dist / k1[2].abs();
            to_seam = true;
        }
        let mut k = [[0.0f64; 3]; 7];
        k[0] = k1;
        for i in 1..7 {
            let mut s = y;
            for (j, kj) in k.iter().enumerate().take(i) {
                for d in 0..3 {
                    s[d] += h * A[i][j] * kj[d];
                }
            }
            k[i] = rhs(&s, seg);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for d in 0..3 {
            let (mut a5, mut a4) = (0.0, 0.0);
            for i in 0..7 {
                a5 += B5[i] * k[i][d];
                a4 += B4[i] * k[i][d];
            }
            y5[d] += h * a5;
            err = err.max((h * (a5 - a4)).abs());
        }
        if err > tol {
            stats.rejected += 1;
            h *= (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.5);
            if h < h_min {
                return Err(Error::Stiffness(format!("step size {h:e} collapsed at t={elapsed}")));
            }
            continue;
        }
        stats.accepted += 1;
        elapsed += h;
        y = y5;
        if to_seam {
            // Land exactly on the seam and switch segments.
            y[2] = target;
            stats.seams += 1;
            if dir > 0.0 {
                seg += 1.0;
            } else {
                seg -= 1.0;
            }
        }
        let grow = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
        h *= grow;
    }
    let w = y[2] - seg;
    let w = if dir < 0.0 && w >= 1.0 { 0.0 } else { w };
    Ok((Torus3Point { x: frac(y[0]), y: frac(y[1]), w: frac(w) }, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::TranslationVector;
    use crate::ceiling::{CeilingFunction, Regime};
    use crate::presets;

    #[test]
    fn unit_ceiling_is_linear_motion() {
        let tv = TranslationVector::from_u64(&[0, 3, 7, 15, 1], &[0, 2, 5, 1], 128).unwrap();
        let eng = FlowEngine::new(&CeilingFunction::constant_one(Regime::exponential()), &tv).unwrap();
        let (a, ap) = tv.alpha_f64();
        let u = Torus3Point::new(0.1, 0.2, 0.3);
        let (v, _) = reparam_ode_advance(u, 7.25, &eng, 1e-10).unwrap();
        let want = Torus3Point::new(0.1 + 7.25 * a, 0.2 + 7.25 * ap, 0.3 + 7.25);
        assert!(v.dist(want) < 1e-12, "{v:?} {want:?}");
    }

    #[test]
    fn reversal_and_conjugacy() {
        let p = presets::desk();
        let tv = p.vector().unwrap();
        let cf = p.ceiling(&tv).unwrap();
        let eng = FlowEngine::new(&cf, &tv).unwrap();
        let fp = FlowPoint { base: TorusPoint::from_f64(0.37, 0.81), s: 0.2 };
        let u = section_map(fp, &eng);
        let back = section_inverse(u, &eng);
        assert!(eng.distance(back, fp) < 1e-12);
        let (v, _) = reparam_ode_advance(u, 37.5, &eng, 1e-10).unwrap();
        let (w, _) = reparam_ode_advance(v, -37.5, &eng, 1e-10).unwrap();
        assert!(w.dist(u) < 1e-9);
        let sf = eng.advance(fp, 37.5).unwrap();
        assert!(section_map(sf, &eng).dist(v) < 1e-6);
    }
}
