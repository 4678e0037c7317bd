//! Finite-element simulation of time-harmonic flexural (biharmonic) plate waves
//! scattered by a one-periodic row of clamped cavities.
//!
//! The unbounded strip is truncated by perfectly matched layers above and below
//! the grating, and the fourth-order problem is solved through mixed
//! second-order decompositions with an interior-penalty stabilisation of the
//! bending moment. A spectral layer (mode ladders, interface operators,
//! propagating operators, layer efficiency constant) provides closed-form
//! diagnostics used for validation and for the parameter studies.

pub mod assemble;
pub mod error;
pub mod harness;
pub mod lifting;
pub mod mesh;
pub mod pml;
pub mod solve;
pub mod spectral;

pub use error::{Error, Result};
