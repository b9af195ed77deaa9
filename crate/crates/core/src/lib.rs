//! Average-section functionals of convex and star bodies.
//!
//! Bodies are described by exact oracles (membership, radial and support
//! functions). On top of them sit Monte-Carlo estimators for spherical and
//! Grassmannian integrals, the average-section and dual-mixed-volume
//! functionals, isotropic positions, and a registry of checks comparing
//! these quantities.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f64` and `f32`); the aliases below fix the usual choice.

pub mod bodies;
pub mod cli;
pub mod error;
pub mod functionals;
pub mod isotropic;
pub mod linalg;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use bodies::{Body, BodyDesc, Direction, Measured, Shape, Subspace};
pub use error::{Error, Result};
pub use quadrature::{Density, Estimate};
pub use sampling::RngStream;
pub use scalar::Real;

pub type Body64 = Body<f64>;
pub type Body32 = Body<f32>;
pub type Direction64 = Direction<f64>;
pub type Subspace64 = Subspace<f64>;
pub type Estimate64 = Estimate<f64>;
