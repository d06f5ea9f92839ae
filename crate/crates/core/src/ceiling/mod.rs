//! Construction of the ceiling function and verification of its properties.

pub mod assemble;
pub mod build;
pub mod kernel;
pub mod profile;
pub mod regime;
pub mod verify;

pub use assemble::{ceiling_assemble, AssembleOptions, CeilingFunction, CeilingLevel};
pub use build::{transfer_build, truncate, y_build, TransferFunction};
pub use kernel::{theta_eval, SmoothingKernel};
pub use profile::{hat_x_build, BumpProfileLevel};
pub use regime::{AmplitudeLaw, Regime};
pub use verify::{coboundary_check, verify_xtilde_properties, SampleOptions};
