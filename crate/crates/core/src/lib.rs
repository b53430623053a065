//! Shift-equivariant constructions over planar point configurations.

pub mod builders;
pub mod divisors;
pub mod lifting;
pub mod periodic;
pub mod plane;
pub mod runge;
pub mod toast;

pub use plane::{c64, C64};
