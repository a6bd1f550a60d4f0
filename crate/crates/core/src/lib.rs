//! Curvature calculus on quadratic metric jets, Eguchi-Hanson obstruction
//! theory and numerical checks of the naive gluing construction for Einstein
//! orbifolds with `R⁴/Z₂` singularities.

pub mod error;
pub mod jets;
pub mod lin4;
pub mod poly;
pub mod sphere;
pub mod ehspace;
pub mod obstruction;
pub mod parallel;
pub mod gluing;
pub mod report;
pub mod cli;

pub use error::{Error, Result};
