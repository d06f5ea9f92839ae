//! Per-level pieces: truncation, the transfer function and the `y`-term.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::arithmetic::Rotation;
use crate::error::{Error, Result};
use crate::trig::{expm1_turns, TrigPolynomial};

/// Solution `ψ` of `ψ(x + α) − ψ(x) = X̃(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub psi: TrigPolynomial,
    /// Every frequency of `ψ` is below this bound in modulus.
    pub cutoff: BigInt,
}

/// Drops every coefficient with `|k| ≥ cutoff`.
pub fn truncate(hat: &TrigPolynomial, cutoff: &BigInt) -> Result<TrigPolynomial> {
    if !cutoff.is_positive() {
        return Err(Error::InvalidInput(format!("cutoff {cutoff} must be >= 1")));
    }
    Ok(match cutoff.to_i128() {
        Some(c) => hat.truncate(c),
        None => hat.clone(),
    })
}

/// Divides each coefficient of `xt` by `e(kα) − 1`, with `{kα}` reduced exactly.
pub fn transfer_build(xt: &TrigPolynomial, rot: &Rotation, cutoff: &BigInt) -> Result<TransferFunction> {
    if xt.dim() != 1 {
        return Err(Error::InvalidInput("transfer function needs a 1-D polynomial".into()));
    }
    let c = cutoff.to_i128();
    for t in xt.terms() {
        let k = t.k[0];
        if k == 0 {
            return Err(Error::InvalidInput("nonzero mean has no transfer function".into()));
        }
        if c.is_some_and(|c| k.abs() >= c) {
            return Err(Error::SmallDivisor(format!("|k|={} >= cutoff {cutoff}", k.abs())));
        }
        if rot.residue_i128(k).is_zero() {
            return Err(Error::SmallDivisor(format!("k={k} is a multiple of the period")));
        }
    }
    let psi = xt.map(|k, c| c / expm1_turns(rot.turns(&rot.residue_i128(k[0]))));
    Ok(TransferFunction { psi, cutoff: cutoff.clone() })
}

/// `ε′·cos(2πq′y)`; an amplitude that underflows to zero is a resolution error.
pub fn y_build(qp: &BigInt, eps_p: f64) -> Result<TrigPolynomial> {
    if !(eps_p > 0.0 && eps_p.is_finite()) {
        return Err(Error::Resolution(format!("amplitude {eps_p:e} for q'={qp} not representable in f64")));
    }
    let k = qp
        .to_i128()
        .filter(|k| *k > 0)
        .ok_or_else(|| Error::Capacity(format!("q'={qp} does not fit 128-bit frequencies")))?;
    Ok(TrigPolynomial::cosine(k, eps_p))
}

/// `|ψₖ|/|X̃ₖ|` over all terms; bounded by the cutoff for best approximations.
pub fn max_gain(xt: &TrigPolynomial, tf: &TransferFunction) -> f64 {
    xt.terms()
        .iter()
        .map(|t| tf.psi.coeff(t.k).norm() / t.c.norm())
        .fold(0.0, f64::max)
}

/// `ψₖ·(e(kα) − 1) − X̃ₖ`, largest modulus relative to `|X̃ₖ|`.
pub fn coefficient_defect(xt: &TrigPolynomial, tf: &TransferFunction, rot: &Rotation) -> f64 {
    xt.terms()
        .iter()
        .map(|t| {
            let d = expm1_turns(rot.turns(&rot.residue_i128(t.k[0])));
            (tf.psi.coeff(t.k) * d - t.c).norm() / t.c.norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceiling::{hat_x_build, BumpProfileLevel};
    use num_complex::Complex64;

    fn rot(p: i64, q: i64) -> Rotation {
        Rotation::new(&BigInt::from(p), &BigInt::from(q))
    }

    #[test]
    fn truncate_identity_and_zero() {
        let p = TrigPolynomial::cosine(5, 1.0);
        assert_eq!(truncate(&p, &BigInt::from(100)).unwrap(), p);
        assert!(truncate(&p, &BigInt::from(1)).unwrap().is_empty());
        assert!(truncate(&p, &BigInt::from(0)).is_err());
    }

    #[test]
    fn zero_input_gives_zero_transfer() {
        let tf = transfer_build(&TrigPolynomial::zero(1), &rot(5, 12), &BigInt::from(12)).unwrap();
        assert!(tf.psi.is_empty());
    }

    #[test]
    fn frequency_at_cutoff_is_rejected() {
        let p = TrigPolynomial::cosine(12, 1.0);
        let e = transfer_build(&p, &rot(5, 12), &BigInt::from(12)).unwrap_err();
        assert!(matches!(e, Error::SmallDivisor(_)));
    }

    #[test]
    fn transfer_gain_bounded_by_next_denominator() {
        // α = [0; 2, 30, 200]: q₁ = 2, q₂ = 61, q₃ = 12202.
        let tv = crate::arithmetic::TranslationVector::from_u64(&[0, 2, 30, 200], &[0, 3, 2], 128).unwrap();
        let r = tv.rotation(crate::arithmetic::Axis::X);
        let lvl = BumpProfileLevel::new(1, BigInt::from(2), 0.03, 12.0).unwrap();
        let hat = hat_x_build(&lvl, None).unwrap();
        let q2 = tv.q(2).unwrap().clone();
        let xt = truncate(&hat, &q2).unwrap();
        let tf = transfer_build(&xt, r, &q2).unwrap();
        assert!(max_gain(&xt, &tf) <= q2.to_f64().unwrap());
        assert!(coefficient_defect(&xt, &tf, r) < 1e-15);
        assert_eq!(tf.psi.coeff([0, 0]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn y_term_value_and_mean() {
        let y = y_build(&BigInt::from(120), 1e-5).unwrap();
        assert!((y.eval(0, 0).re - 1e-5).abs() < 1e-20);
        assert_eq!(y.mean(), Complex64::new(0.0, 0.0));
        assert!(matches!(y_build(&BigInt::from(8104), 0.0), Err(Error::Resolution(_))));
    }
}
