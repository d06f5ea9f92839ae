//! Exact phase reduction `{n·α}` for a rational rotation number `α = p/q`.
//!
//! Phases are kept as residues `r = (n·p) mod q` and only converted to
//! floating point at the end, which keeps `e^{2πinα} − 1` relatively accurate
//! even when `{nα}` is as small as `1/q`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::numeric::dd::Dd;

/// Denominators below this bound use the `u128` fast path for products of a
/// residue with indices `j < 2^12`.
const FAST_DEN_BITS: u64 = 115;

/// Residue of `n·p` modulo the denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Residue {
    Small(u128),
    Big(BigUint),
}

impl Residue {
    pub fn is_zero(&self) -> bool {
        match self {
            Residue::Small(r) => *r == 0,
            Residue::Big(r) => r.is_zero(),
        }
    }
}

/// A rotation number given exactly as a reduced fraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rotation {
    num: BigUint,
    den: BigUint,
    small: Option<(u128, u128)>,
    fixed: u128,
}

impl Rotation {
    /// Builds the rotation by `p/q` (taken mod 1). `q` must be positive.
    pub fn new(p: &BigInt, q: &BigInt) -> Self {
        assert!(q.sign() == Sign::Plus, "rotation denominator must be positive");
        let g = p.gcd(q);
        let (p, q) = (p / &g, q / &g);
        let den = q.to_biguint().unwrap();
        let num = p.mod_floor(&q).to_biguint().unwrap();
        let small = if den.bits() <= FAST_DEN_BITS {
            Some((num.to_u128().unwrap(), den.to_u128().unwrap()))
        } else {
            None
        };
        let fixed = ((&num << 128u32) / &den).to_u128().unwrap_or(u128::MAX);
        Self { num, den, small, fixed }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::new(r.numer(), r.denom())
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn denominator(&self) -> &BigUint {
        &self.den
    }

    /// `⌊{α}·2^128⌋`.
    pub fn fixed(&self) -> u128 {
        self.fixed
    }

    pub fn to_f64(&self) -> f64 {
        ratio_f64(&self.num, &self.den)
    }

    /// Residue of `n·p mod q` for an arbitrary integer `n`.
    pub fn residue(&self, n: &BigInt) -> Residue {
        let q = BigInt::from(self.den.clone());
        let nm = n.mod_floor(&q).to_biguint().unwrap();
        let r = (nm * &self.num) % &self.den;
        self.wrap(r)
    }

    pub fn residue_u(&self, n: &BigUint) -> Residue {
        let r = ((n % &self.den) * &self.num) % &self.den;
        self.wrap(r)
    }

    pub fn residue_i128(&self, n: i128) -> Residue {
        if let Some((p, q)) = self.small {
            let m = n.rem_euclid(q as i128) as u128;
            return Residue::Small(mulmod(m, p, q));
        }
        self.residue(&BigInt::from(n))
    }

    fn wrap(&self, r: BigUint) -> Residue {
        match self.small {
            Some(_) => Residue::Small(r.to_u128().unwrap()),
            None => Residue::Big(r),
        }
    }

    /// `(j·r) mod q` for a small multiplier.
    pub fn scale(&self, r: &Residue, j: u64) -> Residue {
        match (r, self.small) {
            (Residue::Small(r), Some((_, q))) if j < (1 << 12) => Residue::Small((*r * j as u128) % q),
            (Residue::Small(r), Some((_, q))) => Residue::Small(mulmod(*r, j as u128 % q, q)),
            (Residue::Big(r), _) => Residue::Big((r * j) % &self.den),
            (Residue::Small(r), None) => Residue::Big((BigUint::from(*r) * j) % &self.den),
        }
    }

    /// `(r·m) mod q` for an arbitrary multiplier.
    pub fn mul(&self, r: &Residue, m: &BigUint) -> Residue {
        match (r, self.small, m.to_u128()) {
            (Residue::Small(r), Some((_, q)), Some(m)) => Residue::Small(mulmod(*r, m % q, q)),
            _ => self.wrap((self.big(r) * m) % &self.den),
        }
    }

    /// `(a + b) mod q`.
    pub fn add(&self, a: &Residue, b: &Residue) -> Residue {
        match (a, b, self.small) {
            (Residue::Small(a), Residue::Small(b), Some((_, q))) => {
                let s = a + b;
                Residue::Small(if s >= q { s - q } else { s })
            }
            _ => self.wrap((self.big(a) + self.big(b)) % &self.den),
        }
    }

    fn big(&self, r: &Residue) -> BigUint {
        match r {
            Residue::Small(r) => BigUint::from(*r),
            Residue::Big(r) => r.clone(),
        }
    }

    /// Signed phase `r/q` reduced into `[−1/2, 1/2)`, relatively accurate.
    pub fn turns(&self, r: &Residue) -> f64 {
        match (r, self.small) {
            (Residue::Small(r), Some((_, q))) => {
                if 2 * r >= q {
                    -((q - r) as f64) / q as f64
                } else {
                    *r as f64 / q as f64
                }
            }
            _ => {
                let r = self.big(r);
                if &r * 2u32 >= self.den {
                    -ratio_f64(&(&self.den - &r), &self.den)
                } else {
                    ratio_f64(&r, &self.den)
                }
            }
        }
    }

    /// Signed phase as a double-double.
    pub fn turns_dd(&self, r: &Residue) -> Dd {
        let r = self.big(r);
        let (neg, mag) = if &r * 2u32 >= self.den { (true, &self.den - &r) } else { (false, r) };
        let v = big_to_dd(&mag) / big_to_dd(&self.den);
        if neg {
            -v
        } else {
            v
        }
    }

    /// `⌊(r/q)·2^128⌋` as a torus coordinate.
    pub fn fixed_of(&self, r: &Residue) -> u128 {
        match (r, self.small) {
            (Residue::Small(r), Some((_, q))) if q <= (1u128 << 64) => {
                // r < q ≤ 2^64, so r·2^64 fits; two long divisions give 128 bits.
                let hi_num = r << 64;
                let hi = hi_num / q;
                let rem = hi_num % q;
                let lo = (rem << 64) / q;
                (hi << 64) | lo
            }
            _ => ((self.big(r) << 128u32) / &self.den).to_u128().unwrap_or(u128::MAX),
        }
    }
}

/// `(a·b) mod m` for `a, b < m < 2^127` without overflow.
pub fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if let Some(p) = a.checked_mul(b) {
        return p % m;
    }
    let (mut a, mut b) = (a % m, b % m);
    let mut acc: u128 = 0;
    while b > 0 {
        if b & 1 == 1 {
            acc = addmod(acc, a, m);
        }
        a = addmod(a, a, m);
        b >>= 1;
    }
    acc
}

fn addmod(a: u128, b: u128, m: u128) -> u128 {
    let s = a.wrapping_add(b);
    if s >= m || s < a {
        s.wrapping_sub(m)
    } else {
        s
    }
}

/// `a/b` in double precision for big integers, relatively accurate.
pub fn ratio_f64(a: &BigUint, b: &BigUint) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let shift_a = a.bits().saturating_sub(64);
    let shift_b = b.bits().saturating_sub(64);
    let fa = (a >> shift_a).to_f64().unwrap();
    let fb = (b >> shift_b).to_f64().unwrap();
    fa / fb * 2f64.powi(shift_a as i32 - shift_b as i32)
}

/// Big integer to double-double (about 106 significant bits).
pub fn big_to_dd(a: &BigUint) -> Dd {
    let bits = a.bits();
    let shift = bits.saturating_sub(106);
    let top = a >> shift;
    let hi = top.to_f64().unwrap();
    let hi_int = BigInt::from(top.clone()) - BigInt::from(hi as u128);
    let lo = hi_int.to_f64().unwrap();
    let scale = 2f64.powi(shift as i32);
    Dd::from_sum(hi * scale, lo * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mulmod_matches_bigint() {
        let m: u128 = (1u128 << 100) + 12345;
        let a: u128 = (1u128 << 99) + 777;
        let b: u128 = (1u128 << 98) + 31;
        let expect = (BigUint::from(a) * BigUint::from(b)) % BigUint::from(m);
        assert_eq!(BigUint::from(mulmod(a, b, m)), expect);
    }

    #[test]
    fn phases_of_five_twelfths() {
        let rot = Rotation::new(&BigInt::from(5), &BigInt::from(12));
        assert!(rot.residue_i128(12).is_zero());
        assert!((rot.turns(&rot.residue_i128(1)) - 5.0 / 12.0).abs() < 1e-16);
        assert!((rot.turns(&rot.residue_i128(2)) + 1.0 / 6.0).abs() < 1e-16);
        assert!((rot.turns(&rot.residue_i128(-1)) + 5.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn tiny_phase_keeps_relative_accuracy() {
        // α = p/q with q ≈ 2^90; q₋₁·α is within 1/q of an integer.
        let q = BigInt::from(1u128 << 90) + 1;
        let p = BigInt::from(1u128 << 89) + 7;
        let rot = Rotation::new(&p, &q);
        // n = q − 2 gives n·p ≡ −2p (mod q); check the generic path agrees.
        let n = &q - 2;
        let t = rot.turns(&rot.residue(&n));
        let exact = {
            let r = (BigInt::from(-2) * &p).mod_floor(&q);
            let r = r.to_biguint().unwrap();
            let den = q.to_biguint().unwrap();
            if &r * 2u32 >= den {
                -ratio_f64(&(&den - &r), &den)
            } else {
                ratio_f64(&r, &den)
            }
        };
        assert_eq!(t, exact);
    }

    #[test]
    fn scale_and_add_consistent() {
        let rot = Rotation::new(&BigInt::from(123456789u64), &BigInt::from(1000000007u64));
        let r1 = rot.residue_i128(17);
        let r3 = rot.scale(&r1, 3);
        assert_eq!(r3, rot.residue_i128(51));
        assert_eq!(rot.add(&r1, &r3), rot.residue_i128(68));
        assert_eq!(rot.mul(&r1, &BigUint::from(3u8)), r3);
        assert_eq!(rot.mul(&r1, &(BigUint::from(1u8) << 200u32)), rot.residue(&(BigInt::from(17) << 200u32)));
    }

    #[test]
    fn fixed_point_of_half() {
        let rot = Rotation::new(&BigInt::from(1), &BigInt::from(2));
        assert_eq!(rot.fixed(), 1u128 << 127);
        assert_eq!(rot.fixed_of(&rot.residue_i128(3)), 1u128 << 127);
    }
}
