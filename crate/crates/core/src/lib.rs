//! Micromechanics of carbon-nanotube composites and phase-field fracture of
//! the homogenised solid.

pub mod config;
pub mod driver;
pub mod error;
pub mod eshelby;
pub mod fem;
pub mod fracture;
pub mod homogenize;
pub mod quadrature;
pub mod tensor;

pub use error::{Error, Result};
