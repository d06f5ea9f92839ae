//! Points of `𝕋²` and the translation `R_{α,α′}`.

use num_bigint::BigInt;

use crate::arithmetic::{Axis, TranslationVector};
use crate::error::{Error, Result};
use crate::numeric::fixed::{circ_dist, from_fixed, to_fixed};

/// Largest `|l|` accepted by [`translate`].
pub const TRANSLATE_CAP: u64 = 1_000_000_000_000;

/// A point of `𝕋²` in Q0.128 fixed point (coordinates are reduced mod 1 by construction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct TorusPoint {
    pub x: u128,
    pub y: u128,
}

impl TorusPoint {
    pub fn new(x: u128, y: u128) -> Self {
        Self { x, y }
    }

    pub fn from_f64(x: f64, y: f64) -> Self {
        Self { x: to_fixed(x), y: to_fixed(y) }
    }

    pub fn to_f64(self) -> (f64, f64) {
        (from_fixed(self.x), from_fixed(self.y))
    }

    /// Max-metric distance on the torus.
    pub fn dist(self, other: TorusPoint) -> f64 {
        circ_dist(self.x, other.x).max(circ_dist(self.y, other.y))
    }

    pub fn shift(self, dx: u128, dy: u128) -> Self {
        Self { x: self.x.wrapping_add(dx), y: self.y.wrapping_add(dy) }
    }
}

/// `({lα}, {lα′})` in fixed point from exact residues.
pub fn orbit_offset(l: &BigInt, tv: &TranslationVector) -> (u128, u128) {
    let rx = tv.rotation(Axis::X);
    let ry = tv.rotation(Axis::Y);
    (rx.fixed_of(&rx.residue(l)), ry.fixed_of(&ry.residue(l)))
}

/// `R^l z` for `|l| ≤ 10¹²`.
pub fn translate(z: TorusPoint, l: i64, tv: &TranslationVector) -> Result<TorusPoint> {
    if l.unsigned_abs() > TRANSLATE_CAP {
        return Err(Error::Capacity(format!("|l|={} exceeds translation cap {TRANSLATE_CAP}", l.unsigned_abs())));
    }
    Ok(translate_exact(z, &BigInt::from(l), tv))
}

/// `R^l z` for any integer `l`, each coordinate within `2^{−128}` of the exact value.
pub fn translate_exact(z: TorusPoint, l: &BigInt, tv: &TranslationVector) -> TorusPoint {
    let (dx, dy) = orbit_offset(l, tv);
    z.shift(dx, dy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_period() {
        let tv = TranslationVector::from_u64(&[0, 2, 2, 2], &[0, 1, 1, 1], 128).unwrap();
        let z = TorusPoint::from_f64(0.3, 0.7);
        assert_eq!(translate(z, 0, &tv).unwrap(), z);
        // α = 5/12 exactly.
        assert_eq!(translate(z, 12, &tv).unwrap().x, z.x);
        assert!(translate(z, 2_000_000_000_000, &tv).is_err());
    }

    #[test]
    fn negative_steps_invert() {
        let tv = TranslationVector::from_u64(&[0, 3, 7, 15, 1, 292], &[0, 1, 2, 3, 4], 128).unwrap();
        let z = TorusPoint::from_f64(0.123, 0.456);
        let w = translate(translate(z, 987_654_321, &tv).unwrap(), -987_654_321, &tv).unwrap();
        // Each step rounds down once per coordinate.
        assert!(circ_dist(w.x, z.x) < 1e-37 && circ_dist(w.y, z.y) < 1e-37);
    }
}
