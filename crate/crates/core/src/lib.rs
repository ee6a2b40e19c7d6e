//! Reduced dynamics of a rigid spacecraft carrying an internal rotor, for
//! coincident and non-coincident centers of buoyancy and gravity, with
//! numerical checks of the associated Hamilton-Jacobi equations.

pub mod brackets;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hamilton_jacobi;
pub mod lie;
pub mod model;
pub mod reduction;
pub mod report;
pub mod runner;

pub use error::{Error, Result};
