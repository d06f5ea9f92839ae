//! Named parameter sets.
//!
//! `desk` is the two-level construction on which the dynamical criteria run;
//! `deep` trades growth rate for depth (four levels with `G(q) = 64q`) and is
//! used for per-level ceiling properties.

use crate::arithmetic::{build_liouville_pair, Growth, GrowthPolicy, TranslationVector};
use crate::ceiling::{ceiling_assemble, AssembleOptions, CeilingFunction, Regime};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub policy: GrowthPolicy,
    pub regime: Regime,
    pub n0: usize,
    pub n_max: usize,
}

/// Precision of the rounded `α, α′` carried by preset vectors.
pub const DEFAULT_BITS: u64 = 256;

pub fn desk() -> Preset {
    Preset {
        name: "desk",
        policy: GrowthPolicy::relaxed(Growth::Power { coef: 30, exp: 2 }, 2),
        regime: Regime::relaxed(0.02, 0.4, 1e-5, 1.5, 1.0, 1.5),
        n0: 1,
        n_max: 2,
    }
}

pub fn deep() -> Preset {
    Preset {
        name: "deep",
        policy: GrowthPolicy::relaxed(Growth::Power { coef: 64, exp: 1 }, 4),
        regime: Regime::relaxed(0.02, 0.4, 1e-5, 1.5, 1.0, 1.5),
        n0: 1,
        n_max: 4,
    }
}

pub fn by_name(name: &str) -> Option<Preset> {
    match name {
        "desk" => Some(desk()),
        "deep" => Some(deep()),
        _ => None,
    }
}

impl Preset {
    pub fn vector(&self) -> Result<TranslationVector> {
        build_liouville_pair(&self.policy, DEFAULT_BITS)
    }

    pub fn ceiling(&self, tv: &TranslationVector) -> Result<CeilingFunction> {
        ceiling_assemble(tv, &self.regime, self.n0, self.n_max, &AssembleOptions::default())
    }
}
