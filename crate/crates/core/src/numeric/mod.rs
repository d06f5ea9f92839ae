//! Numerical building blocks shared by the construction and the verifiers.

pub mod cheb;
pub mod dd;
pub mod fixed;
pub mod quad;
pub mod rng;
pub mod sum;
