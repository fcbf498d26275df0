//! L^(±alpha)-divergences, their duality and the induced dually flat-like
//! geometry of exponentially concave and convex potentials.

pub mod cli;
pub mod ctransform;
pub mod duality;
pub mod error;
pub mod families;
pub mod geometry;
pub mod linalg;
pub mod parallel;
pub mod potentials;
pub mod quadrature;
pub mod reconstruct;
pub mod sampling;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
