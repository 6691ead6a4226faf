//! Numerical laboratory for two-dimensional exterior flows that are
//! perturbations of the Lamb-Oseen vortex.
//!
//! The crate is organised bottom-up:
//!
//! * [`fields`]: closed-form Oseen vortex, cutoff, truncated vortex and remainder.
//! * [`quadrature`]: radial-panel Gauss-Legendre integration on the plane.
//! * [`estimates`]: sweeps measuring the constants of the truncated-vortex estimates.
//! * [`biot_savart`]: direct Biot-Savart summation and the circulation decomposition.
//! * [`solver`]: vorticity-streamfunction integrator outside the unit disk.
//! * [`spectral`]: periodic Fourier surrogate for whole-plane computations.

pub mod biot_savart;
pub mod error;
pub mod estimates;
pub mod fields;
pub mod geometry;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{Mat2, Point2, Vec2};
