//! Numerical building blocks shared by the measure, energy and bound code.

pub mod normal;
pub mod optimize;
pub mod qmc;
pub mod quad;
pub mod rng;
