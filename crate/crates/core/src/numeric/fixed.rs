//! Q0.128 fixed-point coordinates on the circle.
//!
//! A point of `𝕋 = ℝ/ℤ` is stored as `u128` with value `v·2^{−128}`; integer
//! multiples `k·x mod 1` are then exact wrapping products.

use super::dd::Dd;

const TWO_M64: f64 = 1.0 / 18446744073709551616.0;
const TWO_M128: f64 = TWO_M64 * TWO_M64;

/// `x mod 1` as a fixed-point value (exact for every finite `f64`).
pub fn to_fixed(x: f64) -> u128 {
    let f = x - x.floor();
    if f >= 1.0 {
        return 0;
    }
    // f < 1 has at most 53 significant bits, all above 2^{−1075}; scale in two steps.
    let hi = (f * 18446744073709551616.0).floor();
    let lo = ((f * 18446744073709551616.0 - hi) * 18446744073709551616.0).floor();
    ((hi as u128) << 64) | lo as u128
}

/// Value in `[0, 1)` rounded to double precision.
pub fn from_fixed(v: u128) -> f64 {
    let hi = (v >> 64) as u64;
    let lo = v as u64;
    hi as f64 * TWO_M64 + lo as f64 * TWO_M128
}

/// Signed representative in `[−1/2, 1/2)`.
pub fn signed_turns(v: u128) -> f64 {
    let s = v as i128;
    let hi = (s >> 64) as i64;
    let lo = (s as u128 & 0xFFFF_FFFF_FFFF_FFFF) as u64;
    hi as f64 * TWO_M64 + lo as f64 * TWO_M128
}

/// Signed representative as a double-double (about 106 of the 128 bits).
pub fn signed_turns_dd(v: u128) -> Dd {
    let s = v as i128;
    let a = (s >> 96) as i64 as f64; // top 32 bits, signed
    let b = ((s >> 64) as u128 & 0xFFFF_FFFF) as f64;
    let c = ((s >> 32) as u128 & 0xFFFF_FFFF) as f64;
    let d = (s as u128 & 0xFFFF_FFFF) as f64;
    let two32 = 4294967296.0f64;
    Dd::new(a / two32) + Dd::new(b / (two32 * two32)) + Dd::new(c / (two32 * two32 * two32)) + Dd::new(d * TWO_M128)
}

/// `e(t) = e^{2πit}` for a fixed-point phase.
#[inline]
pub fn cis_fixed(v: u128) -> num_complex::Complex64 {
    let (s, c) = (std::f64::consts::TAU * signed_turns(v)).sin_cos();
    num_complex::Complex64::new(c, s)
}

/// Circular distance `|||a − b|||` between two fixed-point points.
pub fn circ_dist(a: u128, b: u128) -> f64 {
    signed_turns(a.wrapping_sub(b)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for &x in &[0.0, 0.25, 0.5, 0.999999, 1.0 / 3.0, -0.1] {
            let v = to_fixed(x);
            let back = from_fixed(v);
            let want = x - x.floor();
            assert!((back - want).abs() < 1e-16, "x={x}");
        }
    }

    #[test]
    fn signed_representative() {
        assert_eq!(signed_turns(to_fixed(0.75)), -0.25);
        assert_eq!(signed_turns(to_fixed(0.25)), 0.25);
        assert_eq!(signed_turns(1u128 << 127), -0.5);
    }

    #[test]
    fn dd_turns_keep_low_bits() {
        let v: u128 = (1u128 << 100) + 12345;
        let t = signed_turns_dd(v);
        let want_lo = 12345.0 * TWO_M128;
        let r = t - Dd::new(2f64.powi(-28));
        assert!((r.to_f64() - want_lo).abs() < 1e-50);
    }

    #[test]
    fn multiples_are_exact() {
        let x = to_fixed(0.1);
        let three = 3u128.wrapping_mul(x);
        assert_eq!(three, x.wrapping_add(x).wrapping_add(x));
    }
}
