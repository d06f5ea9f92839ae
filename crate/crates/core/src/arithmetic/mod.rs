//! Continued fractions, exact rotations and Liouville-type translation vectors.

pub mod cf;
pub mod growth;
pub mod real;
pub mod rotation;
pub mod vector;
pub mod verify;

pub use cf::{convergents, nearest_int_distance, ConvergentRow, ConvergentTable, PartialQuotients};
pub use growth::{build_liouville_pair, exp_ceil, Growth, GrowthPolicy};
pub use real::{real_value, HighPrecReal};
pub use rotation::{Residue, Rotation};
pub use vector::{Axis, CfData, GrowthRecord, Relation, TranslationVector};
pub use verify::{approx_bounds_verify, best_approx_verify};
