//! Translation vectors `(α, α′)` given by finite continued fractions.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::cf::{convergents, ConvergentTable, PartialQuotients};
use super::real::HighPrecReal;
use super::rotation::Rotation;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

/// Partial quotients of one coordinate together with their convergents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfData {
    pub quotients: PartialQuotients,
    pub table: ConvergentTable,
}

impl CfData {
    pub fn new(quotients: PartialQuotients) -> Result<Self> {
        let table = convergents(&quotients)?;
        Ok(Self { quotients, table })
    }

    /// Index of the last row.
    pub fn last_index(&self) -> usize {
        self.table.len() - 1
    }
}

/// Which growth inequality a record refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `q′ₙ ≥ G(qₙ)`.
    PrimeOverBase,
    /// `qₙ₊₁ ≥ G(q′ₙ)`.
    NextOverPrime,
}

/// One realized growth inequality `lhs ≥ bound`, checked exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthRecord {
    pub n: usize,
    pub relation: Relation,
    pub lhs: BigInt,
    pub bound: BigInt,
    pub holds: bool,
}

/// The pair `(α, α′)` with exact values, rounded values and growth records.
#[derive(Debug, Clone)]
pub struct TranslationVector {
    pub cf_x: CfData,
    pub cf_y: CfData,
    pub value_x: HighPrecReal,
    pub value_y: HighPrecReal,
    pub bits: u64,
    pub growth: Vec<GrowthRecord>,
    exact_x: BigRational,
    exact_y: BigRational,
    rot_x: Rotation,
    rot_y: Rotation,
}

impl TranslationVector {
    pub fn from_quotients(x: PartialQuotients, y: PartialQuotients, bits: u64) -> Result<Self> {
        Self::from_cf(CfData::new(x)?, CfData::new(y)?, bits, Vec::new())
    }

    pub fn from_u64(x: &[u64], y: &[u64], bits: u64) -> Result<Self> {
        Self::from_quotients(PartialQuotients::from_u64(x)?, PartialQuotients::from_u64(y)?, bits)
    }

    pub(crate) fn from_cf(cf_x: CfData, cf_y: CfData, bits: u64, growth: Vec<GrowthRecord>) -> Result<Self> {
        let exact_x = cf_x.table.value();
        let exact_y = cf_y.table.value();
        let value_x = HighPrecReal::from_rational(&exact_x, bits)?;
        let value_y = HighPrecReal::from_rational(&exact_y, bits)?;
        let rot_x = Rotation::from_rational(&exact_x);
        let rot_y = Rotation::from_rational(&exact_y);
        Ok(Self { cf_x, cf_y, value_x, value_y, bits, growth, exact_x, exact_y, rot_x, rot_y })
    }

    pub fn cf(&self, axis: Axis) -> &CfData {
        match axis {
            Axis::X => &self.cf_x,
            Axis::Y => &self.cf_y,
        }
    }

    pub fn exact(&self, axis: Axis) -> &BigRational {
        match axis {
            Axis::X => &self.exact_x,
            Axis::Y => &self.exact_y,
        }
    }

    pub fn value(&self, axis: Axis) -> &HighPrecReal {
        match axis {
            Axis::X => &self.value_x,
            Axis::Y => &self.value_y,
        }
    }

    pub fn rotation(&self, axis: Axis) -> &Rotation {
        match axis {
            Axis::X => &self.rot_x,
            Axis::Y => &self.rot_y,
        }
    }

    /// `qₙ` of α.
    pub fn q(&self, n: usize) -> Option<&BigInt> {
        self.cf_x.table.q(n)
    }

    /// `q′ₙ` of α′.
    pub fn qp(&self, n: usize) -> Option<&BigInt> {
        self.cf_y.table.q(n)
    }

    pub fn p(&self, n: usize) -> Option<&BigInt> {
        self.cf_x.table.p(n)
    }

    pub fn pp(&self, n: usize) -> Option<&BigInt> {
        self.cf_y.table.p(n)
    }

    /// `{α}` and `{α′}` in double precision.
    pub fn alpha_f64(&self) -> (f64, f64) {
        (self.rot_x.to_f64(), self.rot_y.to_f64())
    }

    /// Largest `L` such that `qₙ, q′ₙ` exist for `n ≤ L` and `q_{L+1}` exists.
    pub fn levels(&self) -> usize {
        let nx = self.cf_x.last_index();
        let ny = self.cf_y.last_index();
        nx.saturating_sub(1).min(ny)
    }

    /// True when every recorded growth inequality holds.
    pub fn growth_holds(&self) -> bool {
        self.growth.iter().all(|g| g.holds)
    }
}
