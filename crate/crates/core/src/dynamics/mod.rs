//! Torus translations, Birkhoff sums, the special flow and its ODE model.

pub mod birkhoff;
pub mod flow;
pub mod ode;
pub mod torus;

pub use birkhoff::{birkhoff_polynomial, birkhoff_sum, AxisKernel, BirkhoffResult, Method};
pub use flow::{FlowEngine, FlowPoint, FlowTime};
pub use ode::{reparam_ode_advance, section_inverse, section_map, OdeStats, Torus3Point};
pub use torus::{translate, translate_exact, TorusPoint};
