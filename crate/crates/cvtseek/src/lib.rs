//! Deterministic simulation library for multi-robot source seeking: spherical
//! formation geometry built from centroidal Voronoi tessellations, closed-form
//! cooperative gradient estimation from point measurements, a clamped
//! gradient-ascent seeking loop, and a seeded Monte Carlo experiment harness.

pub mod cvt;
pub mod error;
pub mod estimator;
pub mod field;
pub mod formation;
pub mod geometry;
pub mod harness;
pub mod seeker;

pub use error::{Error, Result};
pub use geometry::{Mat3, Vec3};
