//! Special flows over translations of the two-torus whose ceiling functions
//! are built level by level from Liouville-type rotation vectors, together
//! with exact and numerical verifiers for every inequality the construction
//! relies on.

pub mod arithmetic;
pub mod ceiling;
pub mod criteria;
pub mod dynamics;
pub mod error;
pub mod numeric;
pub mod presets;
pub mod report;
pub mod spectral;
pub mod trig;

pub use error::{Error, Result};
pub use report::{CriterionReport, Status};
